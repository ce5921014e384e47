#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "winstitch/blending.hpp"
#include "winstitch/experiment.hpp"
#include "winstitch/image_io.hpp"
#include "winstitch/metrics.hpp"
#include "winstitch/predictors.hpp"
#include "winstitch/synthetic.hpp"
#include "winstitch/tiling.hpp"
#include "winstitch/window.hpp"

namespace fs = std::filesystem;
using namespace winstitch;

namespace {

struct Dims {
    int height = 0;
    int width = 0;
};

Dims parse_dims(const std::string& text) {
    Dims d;
    char sep = 0;
    std::istringstream in(text);
    if (!(in >> d.height >> sep >> d.width) || (sep != 'x' && sep != 'X') || !in.eof() ||
        d.height <= 0 || d.width <= 0)
        throw std::invalid_argument("expected HxW, got '" + text + "'");
    return d;
}

PaddingPolicy parse_padding(const std::string& text) {
    if (text == "reflect") return PaddingPolicy::Reflect;
    if (text == "reject") return PaddingPolicy::Reject;
    throw std::invalid_argument("padding must be reflect or reject");
}

std::vector<std::string> list_pfm(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::invalid_argument("not a directory: " + dir.string());
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pfm")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

int cmd_windows(const std::string& kind_name, const std::string& size_text,
                const std::string& position_name, const std::string& out_path) {
    const WindowKind kind = parse_window_kind(kind_name);
    const PositionClass position = parse_position_class(position_name);
    const Dims size = parse_dims(size_text);
    const Window2D window = make_window_2d(kind, size.height, size.width, position);

    ImageTensor image(1, window.height, window.width);
    image.data() = window.weights;
    save_image(out_path, image);
    std::cerr << "windows: wrote " << to_string(kind) << " " << window.height << "x"
              << window.width << " " << to_string(position) << " to " << out_path << "\n";
    return 0;
}

int cmd_blend(const std::string& input_path, const std::string& patch_text,
              const std::string& window_name, const std::string& predictor_text,
              const std::string& padding_text, const std::string& preview_path,
              const std::string& out_path) {
    const Dims patch = parse_dims(patch_text);
    const PaddingPolicy padding = parse_padding(padding_text);
    const PredictorSpec spec = PredictorSpec::parse(predictor_text);
    const bool baseline = window_name == "none";
    if (baseline && !preview_path.empty())
        throw std::invalid_argument("--preview requires a window kind (the baseline is the preview)");

    const ImageTensor input = load_image(input_path);
    const PatchGrid grid = plan_grid(input.height(), input.width(), patch.height, patch.width,
                                     padding);

    long predictions = 0;
    ImageTensor output;
    if (spec.kind == PredictorSpec::Kind::External) {
        const PatchMode mode = baseline ? PatchMode::NonOverlapping : PatchMode::Overlapping;
        const auto refs = enumerate_patches(grid, mode);
        auto stream_into = [&](const std::vector<PatchRef>& batch, auto& accumulator) {
            predict_stream(
                spec.command, static_cast<long>(batch.size()),
                [&](long k) { return extract_patch(input, batch[k], grid); },
                [&](long k, ImageTensor response) { accumulator.add(batch[k], response); });
            predictions += static_cast<long>(batch.size());
        };
        if (baseline) {
            std::vector<std::pair<PatchRef, ImageTensor>> placed;
            placed.reserve(refs.size());
            predict_stream(
                spec.command, static_cast<long>(refs.size()),
                [&](long k) { return extract_patch(input, refs[k], grid); },
                [&](long k, ImageTensor response) {
                    placed.emplace_back(refs[k], std::move(response));
                });
            predictions = static_cast<long>(refs.size());
            output = blend_baseline(placed, grid);
        } else {
            const WindowKind kind = parse_window_kind(window_name);
            BlendAccumulator acc(grid, kind);
            if (!preview_path.empty()) {
                // Two streams: the non-overlapping pass first (also emitted as
                // the preview), then the remaining odd-offset patches.
                std::vector<std::pair<PatchRef, ImageTensor>> placed;
                std::vector<PatchRef> evens, odds;
                for (const PatchRef& ref : refs)
                    (ref.row % 2 == 0 && ref.col % 2 == 0 ? evens : odds).push_back(ref);
                predict_stream(
                    spec.command, static_cast<long>(evens.size()),
                    [&](long k) { return extract_patch(input, evens[k], grid); },
                    [&](long k, ImageTensor response) {
                        acc.add(evens[k], response);
                        placed.emplace_back(
                            PatchRef{evens[k].row / 2, evens[k].col / 2, evens[k].offset_y,
                                     evens[k].offset_x, PositionClass::Interior},
                            std::move(response));
                    });
                save_image(preview_path, blend_baseline(placed, grid));
                placed.clear();
                stream_into(odds, acc);
                predictions += static_cast<long>(evens.size());
            } else {
                stream_into(refs, acc);
            }
            output = acc.finish();
        }
    } else {
        PatchPredictFn fn = [&](const PatchRef& ref, const ImageTensor& patch_pixels) {
            ++predictions;
            return predict(spec, patch_pixels, ref.offset_y, ref.offset_x);
        };
        if (baseline) {
            output = blend_baseline_with(input, grid, fn);
        } else {
            const WindowKind kind = parse_window_kind(window_name);
            if (!preview_path.empty()) {
                output = blend_progressive(input, grid, kind, fn,
                                           [&](std::string_view stage, const ImageTensor& img) {
                                               if (stage == "preview")
                                                   save_image(preview_path, img);
                                           });
            } else {
                output = blend_with(input, grid, kind, fn);
            }
        }
    }
    save_image(out_path, output);
    std::cerr << "blend: grid " << grid.base_rows << "x" << grid.base_cols << " base patches, "
              << predictions << " predictions, output " << out_path << "\n";
    return 0;
}

int cmd_simulate(int images, const std::string& size_text, int classes, std::uint64_t seed,
                 const std::string& out_dir) {
    if (images < 1) throw std::invalid_argument("--images must be >= 1");
    if (classes != 1 && classes != 3)
        throw std::invalid_argument("--classes must be 1 or 3 (PFM channel counts)");
    const Dims size = parse_dims(size_text);
    fs::create_directories(out_dir);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < images; ++k) {
        std::ostringstream name;
        name << "img_" << std::setw(3) << std::setfill('0') << k << ".pfm";
        save_image((fs::path(out_dir) / name.str()).string(),
                   make_class_map(size.height, size.width, classes, rng));
    }
    std::cerr << "simulate: wrote " << images << " images to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& truth_dir,
                 const std::vector<std::string>& method_args, const std::string& baseline_label,
                 const std::string& out_path, double dynamic_range) {
    std::vector<std::pair<std::string, std::string>> methods; // label -> dir
    for (const auto& arg : method_args) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--method expects LABEL=DIR, got '" + arg + "'");
        methods.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
    }
    const auto baseline_it =
        std::find_if(methods.begin(), methods.end(),
                     [&](const auto& m) { return m.first == baseline_label; });
    if (baseline_it == methods.end())
        throw std::invalid_argument("--baseline must name one of the --method labels");

    const auto names = list_pfm(truth_dir);
    if (names.empty()) throw std::invalid_argument("no .pfm images under " + truth_dir);
    for (const auto& [label, dir] : methods) {
        if (list_pfm(dir) != names)
            throw std::invalid_argument("image set under '" + dir +
                                        "' does not match the truth directory");
    }

    SsimParams params;
    params.dynamic_range = dynamic_range;
    std::map<std::string, std::vector<double>> scores;
    for (const auto& name : names) {
        const ImageTensor truth = load_image((fs::path(truth_dir) / name).string());
        for (const auto& [label, dir] : methods) {
            const ImageTensor img = load_image((fs::path(dir) / name).string());
            scores[label].push_back(ssim_multichannel(img, truth, params));
        }
    }

    std::ofstream csv(out_path);
    if (!csv) throw std::runtime_error("cannot open " + out_path + " for writing");
    csv << "# winstitch evaluate\n# truth=" << truth_dir << " baseline=" << baseline_label
        << " range=" << dynamic_range << " images=" << names.size() << "\n";
    csv << "image,method,ssim,adjusted-ssim\n" << std::setprecision(9);
    const auto& baseline_scores = scores[baseline_label];
    for (std::size_t i = 0; i < names.size(); ++i)
        for (const auto& [label, dir] : methods)
            csv << names[i] << "," << label << "," << scores[label][i] << ","
                << scores[label][i] - baseline_scores[i] << "\n";

    for (const auto& [label, dir] : methods) {
        if (label == baseline_label) continue;
        try {
            std::cout << format_comparison(label, baseline_label,
                                           paired_t_test(scores[label], baseline_scores))
                      << "\n";
        } catch (const std::invalid_argument&) {
            std::cout << label << " vs " << baseline_label << ": degenerate (zero variance)\n";
        }
    }
    std::cerr << "evaluate: wrote " << out_path << "\n";
    return 0;
}

int cmd_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    const ExperimentResult result = run_experiment(config);
    write_experiment_reports(result, out_dir);
    std::cout << format_summary(result);
    std::cerr << "experiment: reports under " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seamless reconstruction of per-patch image predictions with 2-D windows"};
    app.require_subcommand(1);

    // windows
    std::string w_kind = "hann", w_size = "128x128", w_position = "interior", w_out;
    auto* sub_windows = app.add_subcommand("windows", "Export a 2-D window as a PFM image");
    sub_windows->add_option("--kind", w_kind, "average|hann|bartlett-hann|triangular|pyramidal");
    sub_windows->add_option("--size", w_size, "Patch size as HxW");
    sub_windows->add_option("--position", w_position,
                            "interior|up|down|left|right|upleft|upright|downleft|downright");
    sub_windows->add_option("--out", w_out, "Output .pfm path")->required();

    // blend
    std::string b_input, b_patch = "128x128", b_window = "hann", b_predictor = "identity";
    std::string b_padding = "reflect", b_preview, b_out;
    auto* sub_blend = app.add_subcommand("blend", "Patch-predict-blend pipeline over one image");
    sub_blend->add_option("--input", b_input, "Input image (.pfm or .pgm)")->required();
    sub_blend->add_option("--patch", b_patch, "Patch size as HxW");
    sub_blend->add_option("--window", b_window,
                          "Window kind, or 'none' for the non-overlapping baseline");
    sub_blend->add_option("--predictor", b_predictor,
                          "identity | blur:sigma=S | bordernoise:amp=A,falloff=F,seed=K | "
                          "external:CMD...");
    sub_blend->add_option("--padding", b_padding, "reflect|reject");
    sub_blend->add_option("--preview", b_preview,
                          "Also write the non-overlapping preview to this path");
    sub_blend->add_option("--out", b_out, "Output image path")->required();

    // simulate
    int s_images = 14, s_classes = 3;
    std::string s_size = "1024x1024", s_outdir;
    std::uint64_t s_seed = 7;
    auto* sub_simulate =
        app.add_subcommand("simulate", "Generate synthetic one-hot ground-truth maps");
    sub_simulate->add_option("--images", s_images, "Number of images");
    sub_simulate->add_option("--size", s_size, "Image size as HxW");
    sub_simulate->add_option("--classes", s_classes, "Class channels (1 or 3)");
    sub_simulate->add_option("--seed", s_seed, "RNG seed");
    sub_simulate->add_option("--outdir", s_outdir, "Output directory")->required();

    // evaluate
    std::string e_truth, e_baseline, e_out;
    std::vector<std::string> e_methods;
    double e_range = 1.0;
    auto* sub_evaluate =
        app.add_subcommand("evaluate", "Score method outputs against ground truth");
    sub_evaluate->add_option("--truth", e_truth, "Ground-truth directory")->required();
    sub_evaluate->add_option("--method,--methods", e_methods, "LABEL=DIR (repeatable)")
        ->required();
    sub_evaluate->add_option("--baseline", e_baseline, "Label of the baseline method")
        ->required();
    sub_evaluate->add_option("--out", e_out, "Report CSV path")->required();
    sub_evaluate->add_option("--range", e_range, "SSIM dynamic range L");

    // experiment
    ExperimentConfig x_config;
    std::string x_size = "1024x1024", x_patch = "128x128", x_out;
    auto* sub_experiment = app.add_subcommand(
        "experiment", "End-to-end comparison of all window kinds on synthetic data");
    sub_experiment->add_option("--seed", x_config.seed, "RNG seed");
    sub_experiment->add_option("--images", x_config.images, "Sample size");
    sub_experiment->add_option("--size", x_size, "Image size as HxW");
    sub_experiment->add_option("--patch", x_patch, "Patch size as HxW");
    sub_experiment->add_option("--classes", x_config.classes, "Class channels (1 or 3)");
    sub_experiment->add_option("--noise-amplitude", x_config.noise_amplitude,
                               "Border-noise amplitude");
    sub_experiment->add_option("--noise-falloff", x_config.noise_falloff,
                               "Border-noise falloff in pixels");
    sub_experiment->add_option("--out", x_out, "Output directory for reports")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_windows->parsed()) return cmd_windows(w_kind, w_size, w_position, w_out);
        if (sub_blend->parsed())
            return cmd_blend(b_input, b_patch, b_window, b_predictor, b_padding, b_preview,
                             b_out);
        if (sub_simulate->parsed())
            return cmd_simulate(s_images, s_size, s_classes, s_seed, s_outdir);
        if (sub_evaluate->parsed())
            return cmd_evaluate(e_truth, e_methods, e_baseline, e_out, e_range);
        if (sub_experiment->parsed()) {
            const Dims size = parse_dims(x_size);
            const Dims patch = parse_dims(x_patch);
            x_config.height = size.height;
            x_config.width = size.width;
            x_config.patch_height = patch.height;
            x_config.patch_width = patch.width;
            return cmd_experiment(x_config, x_out);
        }
    } catch (const PredictorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

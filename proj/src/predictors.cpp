#include "winstitch/predictors.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>
#include <streambuf>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include "winstitch/image_io.hpp"

namespace winstitch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_key(std::uint64_t state, std::uint64_t value) {
    return splitmix64(state ^ (value + 0x9e3779b97f4a7c15ULL));
}

int chebyshev_border_distance(int j, int i, int height, int width) {
    return std::min(std::min(i, j), std::min(width - 1 - i, height - 1 - j));
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    for (double& v : kernel) v /= sum;
    return kernel;
}

// Mirror between pixels with the border sample repeated (x[-1] == x[0]):
// with a normalised symmetric kernel this reflection preserves the plane sum
// exactly, hence the patch mean.
int reflect_repeat(int v, int n) {
    while (v < 0 || v >= n) {
        if (v < 0) v = -v - 1;
        else v = 2 * n - 1 - v;
    }
    return v;
}

void blur_plane(const double* in, double* out, int height, int width,
                const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size()) / 2;
    std::vector<double> tmp(static_cast<std::size_t>(height) * width);
    for (int y = 0; y < height; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * width;
        double* trow = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       row[reflect_repeat(x + k, width)];
            trow[x] = acc;
        }
    }
    for (int y = 0; y < height; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<std::size_t>(k + radius)] *
                       tmp[static_cast<std::size_t>(reflect_repeat(y + k, height)) * width + x];
            orow[x] = acc;
        }
    }
}

void validate(const PredictorSpec& spec) {
    switch (spec.kind) {
    case PredictorSpec::Kind::Identity:
        return;
    case PredictorSpec::Kind::GaussianBlur:
        if (!(spec.sigma > 0.0)) throw std::invalid_argument("blur: sigma must be > 0");
        return;
    case PredictorSpec::Kind::BorderNoise:
        if (!(spec.amplitude >= 0.0))
            throw std::invalid_argument("bordernoise: amplitude must be >= 0");
        if (!(spec.falloff > 0.0))
            throw std::invalid_argument("bordernoise: falloff must be > 0");
        return;
    case PredictorSpec::Kind::External:
        if (spec.command.empty())
            throw std::invalid_argument("external: command must be non-empty");
        return;
    }
    throw std::invalid_argument("unknown predictor kind");
}

} // namespace

PredictorSpec PredictorSpec::identity() { return {}; }

PredictorSpec PredictorSpec::gaussian_blur(double sigma) {
    PredictorSpec spec;
    spec.kind = Kind::GaussianBlur;
    spec.sigma = sigma;
    validate(spec);
    return spec;
}

PredictorSpec PredictorSpec::border_noise(double amplitude, double falloff, std::uint64_t seed) {
    PredictorSpec spec;
    spec.kind = Kind::BorderNoise;
    spec.amplitude = amplitude;
    spec.falloff = falloff;
    spec.seed = seed;
    validate(spec);
    return spec;
}

PredictorSpec PredictorSpec::external(std::vector<std::string> command) {
    PredictorSpec spec;
    spec.kind = Kind::External;
    spec.command = std::move(command);
    validate(spec);
    return spec;
}

PredictorSpec PredictorSpec::parse(const std::string& text) {
    if (text == "identity") return identity();
    if (text.rfind("external:", 0) == 0) {
        std::vector<std::string> command;
        std::istringstream rest(text.substr(9));
        std::string word;
        while (rest >> word) command.push_back(word);
        return external(std::move(command));
    }
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    std::vector<std::pair<std::string, std::string>> kv;
    if (colon != std::string::npos) {
        std::istringstream args(text.substr(colon + 1));
        std::string item;
        while (std::getline(args, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("predictor: expected key=value in '" + item + "'");
            kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
    }
    auto get = [&](const std::string& key) -> const std::string& {
        for (const auto& [k, v] : kv)
            if (k == key) return v;
        throw std::invalid_argument("predictor: missing parameter '" + key + "'");
    };
    if (head == "blur") return gaussian_blur(std::stod(get("sigma")));
    if (head == "bordernoise")
        return border_noise(std::stod(get("amp")), std::stod(get("falloff")),
                            std::stoull(get("seed")));
    throw std::invalid_argument("unknown predictor: " + text);
}

double border_noise_envelope(int j, int i, int height, int width, double amplitude,
                             double falloff) {
    return amplitude *
           std::exp(-static_cast<double>(chebyshev_border_distance(j, i, height, width)) /
                    falloff);
}

double border_noise_normal(std::uint64_t seed, int offset_y, int offset_x, int channel, int j,
                           int i) {
    std::uint64_t key = splitmix64(seed);
    key = mix_key(key, static_cast<std::uint64_t>(offset_y));
    key = mix_key(key, static_cast<std::uint64_t>(offset_x));
    key = mix_key(key, static_cast<std::uint64_t>(channel));
    key = mix_key(key, static_cast<std::uint64_t>(j));
    key = mix_key(key, static_cast<std::uint64_t>(i));
    const std::uint64_t a = splitmix64(key);
    const std::uint64_t b = splitmix64(key ^ 0xda3e39cb94b95bdbULL);
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1p-53; // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * 0x1p-53;         // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ImageTensor predict(const PredictorSpec& spec, const ImageTensor& patch, int offset_y,
                    int offset_x) {
    validate(spec);
    switch (spec.kind) {
    case PredictorSpec::Kind::Identity:
        return patch;
    case PredictorSpec::Kind::GaussianBlur: {
        ImageTensor out(patch.channels(), patch.height(), patch.width());
        const auto kernel = gaussian_kernel(spec.sigma);
        for (int c = 0; c < patch.channels(); ++c)
            blur_plane(patch.channel(c), out.channel(c), patch.height(), patch.width(), kernel);
        return out;
    }
    case PredictorSpec::Kind::BorderNoise: {
        ImageTensor out = patch;
        for (int c = 0; c < patch.channels(); ++c) {
            double* plane = out.channel(c);
            std::size_t k = 0;
            for (int j = 0; j < patch.height(); ++j)
                for (int i = 0; i < patch.width(); ++i, ++k) {
                    const double envelope = border_noise_envelope(
                        j, i, patch.height(), patch.width(), spec.amplitude, spec.falloff);
                    plane[k] += envelope *
                                border_noise_normal(spec.seed, offset_y, offset_x, c, j, i);
                }
        }
        return out;
    }
    case PredictorSpec::Kind::External: {
        ImageTensor result;
        predict_stream(
            spec.command, 1, [&](long) { return patch; },
            [&](long, ImageTensor response) { result = std::move(response); });
        return result;
    }
    }
    throw std::invalid_argument("unknown predictor kind");
}

namespace {

class FdOutputBuf : public std::streambuf {
public:
    explicit FdOutputBuf(int fd) : fd_(fd) { setp(buffer_.data(), buffer_.data() + buffer_.size()); }

    bool flush() {
        const std::ptrdiff_t n = pptr() - pbase();
        const char* p = pbase();
        std::ptrdiff_t written = 0;
        while (written < n) {
            const ssize_t r = ::write(fd_, p + written, static_cast<std::size_t>(n - written));
            if (r < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            written += r;
        }
        setp(buffer_.data(), buffer_.data() + buffer_.size());
        return true;
    }

protected:
    int overflow(int c) override {
        if (!flush()) return traits_type::eof();
        if (c != traits_type::eof()) sputc(static_cast<char>(c));
        return c;
    }
    int sync() override { return flush() ? 0 : -1; }

private:
    int fd_;
    std::array<char, 1 << 16> buffer_;
};

class FdInputBuf : public std::streambuf {
public:
    explicit FdInputBuf(int fd) : fd_(fd) {}

protected:
    int underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        ssize_t n;
        do {
            n = ::read(fd_, buffer_.data(), buffer_.size());
        } while (n < 0 && errno == EINTR);
        if (n <= 0) return traits_type::eof();
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    int fd_;
    std::array<char, 1 << 16> buffer_;
};

struct Pipe {
    int read_fd = -1;
    int write_fd = -1;

    Pipe() {
        int fds[2];
        if (::pipe(fds) != 0) throw std::runtime_error("pipe() failed");
        read_fd = fds[0];
        write_fd = fds[1];
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (read_fd >= 0) ::close(read_fd);
        read_fd = -1;
    }
    void close_write() {
        if (write_fd >= 0) ::close(write_fd);
        write_fd = -1;
    }
};

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string describe_exit(int status) {
    if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
    return "ended abnormally";
}

} // namespace

void predict_stream(const std::vector<std::string>& command, long count,
                    const std::function<ImageTensor(long)>& source,
                    const std::function<void(long, ImageTensor)>& sink) {
    if (command.empty()) throw std::invalid_argument("external: command must be non-empty");
    if (count < 0) throw std::invalid_argument("external: negative blob count");
    ignore_sigpipe_once();

    Pipe to_child;
    Pipe from_child;
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork() failed");
    if (pid == 0) {
        ::dup2(to_child.read_fd, STDIN_FILENO);
        ::dup2(from_child.write_fd, STDOUT_FILENO);
        ::close(to_child.read_fd);
        ::close(to_child.write_fd);
        ::close(from_child.read_fd);
        ::close(from_child.write_fd);
        std::vector<char*> argv;
        argv.reserve(command.size() + 1);
        for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        _exit(127);
    }
    to_child.close_read();
    from_child.close_write();

    // Request shapes, recorded by the writer as it goes; the reader checks
    // each response against them. The child may buffer arbitrarily, so the
    // writer runs ahead on its own thread.
    struct Shape {
        int channels, height, width;
    };
    std::vector<Shape> shapes(static_cast<std::size_t>(count));
    std::mutex mutex;
    std::condition_variable cv;
    long written = 0;
    bool writer_done = false;
    std::exception_ptr writer_error;

    std::thread writer([&] {
        FdOutputBuf buf(to_child.write_fd);
        std::ostream out(&buf);
        long k = 0;
        try {
            for (; k < count; ++k) {
                ImageTensor request = source(k);
                {
                    std::lock_guard<std::mutex> lock(mutex);
                    shapes[static_cast<std::size_t>(k)] = {request.channels(), request.height(),
                                                           request.width()};
                    written = k + 1;
                }
                cv.notify_all();
                write_pfm(out, request);
            }
            if (!buf.flush())
                throw PredictorError("external: flushing requests failed", count - 1);
        } catch (const PredictorError&) {
            std::lock_guard<std::mutex> lock(mutex);
            writer_error = std::current_exception();
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mutex);
            writer_error = std::make_exception_ptr(PredictorError(
                "external: writing request " + std::to_string(k) + " failed: " + e.what(), k));
        }
        {
            std::lock_guard<std::mutex> lock(mutex);
            writer_done = true;
        }
        cv.notify_all();
        to_child.close_write(); // EOF for the child
    });

    auto finish = [&](bool join_writer) {
        if (join_writer && writer.joinable()) writer.join();
        from_child.close_read();
        int status = 0;
        ::waitpid(pid, &status, 0);
        return status;
    };

    FdInputBuf in_buf(from_child.read_fd);
    std::istream in(&in_buf);
    long completed = 0;
    try {
        for (long k = 0; k < count; ++k) {
            {
                // A writer failure usually just mirrors the child dying; keep
                // reading as long as request k was produced so the error is
                // attributed to the first response that cannot arrive.
                std::unique_lock<std::mutex> lock(mutex);
                cv.wait(lock, [&] { return written > k || writer_done; });
                if (written <= k) {
                    if (writer_error) std::rethrow_exception(writer_error);
                    throw PredictorError("external: request " + std::to_string(k) +
                                             " was never produced",
                                         k);
                }
            }
            ImageTensor response;
            try {
                response = read_pfm(in);
            } catch (const std::exception& e) {
                throw PredictorError("external: reading response for patch " +
                                         std::to_string(k) + " failed: " + e.what(),
                                     k);
            }
            const Shape expected = shapes[static_cast<std::size_t>(k)];
            if (response.channels() != expected.channels ||
                response.height() != expected.height || response.width() != expected.width)
                throw PredictorError("external: response dimensions for patch " +
                                         std::to_string(k) + " do not match the request",
                                     k);
            sink(k, std::move(response));
            ++completed;
        }
    } catch (const PredictorError& e) {
        const int status = finish(true);
        if (status != 0)
            throw PredictorError("external: child " + describe_exit(status) + " after " +
                                     std::to_string(completed) + " of " + std::to_string(count) +
                                     " blobs; failed at patch index " +
                                     std::to_string(e.patch_index()),
                                 e.patch_index());
        throw;
    } catch (...) {
        finish(true);
        throw;
    }

    const int status = finish(true);
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (writer_error) std::rethrow_exception(writer_error);
    }
    if (status != 0)
        throw PredictorError("external: child " + describe_exit(status));
}

} // namespace winstitch

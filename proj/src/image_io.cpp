#include "winstitch/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace winstitch {

namespace {

constexpr long kMaxDim = 1 << 20;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Reads a whitespace-delimited header token and consumes exactly one
// trailing whitespace byte, so binary payload can follow immediately.
// PGM '#' comments are honoured when requested.
std::string next_token(std::istream& in, bool allow_comments) {
    std::string token;
    int c = in.get();
    while (c != EOF && (is_space(c) || (allow_comments && c == '#'))) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    while (c != EOF && !is_space(c)) {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (token.empty() || c == EOF) fail("image header: truncated");
    return token;
}

long parse_dim(const std::string& token, const char* what) {
    std::size_t pos = 0;
    long value = 0;
    try {
        value = std::stol(token, &pos);
    } catch (const std::exception&) {
        fail(std::string("image header: bad ") + what);
    }
    if (pos != token.size() || value <= 0 || value > kMaxDim)
        fail(std::string("image header: bad ") + what);
    return value;
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        fail("image payload: truncated");
}

float decode_float(const unsigned char* p, bool little_endian) {
    std::uint32_t bits;
    if (little_endian)
        bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    else
        bits = static_cast<std::uint32_t>(p[3]) | (static_cast<std::uint32_t>(p[2]) << 8) |
               (static_cast<std::uint32_t>(p[1]) << 16) | (static_cast<std::uint32_t>(p[0]) << 24);
    return std::bit_cast<float>(bits);
}

void encode_float_le(float v, unsigned char* p) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    p[0] = static_cast<unsigned char>(bits & 0xff);
    p[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

} // namespace

ImageTensor read_pfm(std::istream& in) {
    const std::string magic = next_token(in, false);
    int channels = 0;
    if (magic == "PF") channels = 3;
    else if (magic == "Pf") channels = 1;
    else fail("pfm: bad magic '" + magic + "'");

    const int width = static_cast<int>(parse_dim(next_token(in, false), "width"));
    const int height = static_cast<int>(parse_dim(next_token(in, false), "height"));

    const std::string scale_token = next_token(in, false);
    double scale = 0.0;
    try {
        scale = std::stod(scale_token);
    } catch (const std::exception&) {
        fail("pfm: bad scale");
    }
    if (scale == 0.0) fail("pfm: bad scale");
    const bool little_endian = scale < 0.0;

    const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
    std::vector<char> payload(samples * 4);
    read_exact(in, payload.data(), payload.size());

    ImageTensor image(channels, height, width);
    const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
    // Payload rows run bottom-to-top, channels interleaved per pixel.
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;
        for (int x = 0; x < width; ++x) {
            const unsigned char* px = bytes + (static_cast<std::size_t>(row) * width + x) * channels * 4;
            for (int c = 0; c < channels; ++c)
                image.at(c, y, x) = decode_float(px + static_cast<std::size_t>(c) * 4, little_endian);
        }
    }
    return image;
}

ImageTensor read_pfm(const std::vector<std::uint8_t>& bytes) {
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    ImageTensor image = read_pfm(in);
    if (in.peek() != EOF) fail("pfm: trailing bytes after payload");
    return image;
}

void write_pfm(std::ostream& out, const ImageTensor& image) {
    const int channels = image.channels();
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("pfm: only 1- or 3-channel images are supported");
    out << (channels == 3 ? "PF" : "Pf") << '\n'
        << image.width() << ' ' << image.height() << '\n'
        << "-1.0" << '\n';
    std::vector<unsigned char> row_bytes(static_cast<std::size_t>(image.width()) * channels * 4);
    for (int y = image.height() - 1; y >= 0; --y) {
        unsigned char* p = row_bytes.data();
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < channels; ++c, p += 4)
                encode_float_le(static_cast<float>(image.at(c, y, x)), p);
        out.write(reinterpret_cast<const char*>(row_bytes.data()),
                  static_cast<std::streamsize>(row_bytes.size()));
    }
    if (!out) fail("pfm: write failed");
}

std::vector<std::uint8_t> write_pfm(const ImageTensor& image) {
    std::ostringstream out;
    write_pfm(out, image);
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

ImageTensor read_pgm(std::istream& in) {
    const std::string magic = next_token(in, true);
    if (magic != "P5") fail("pgm: bad magic '" + magic + "'");
    const int width = static_cast<int>(parse_dim(next_token(in, true), "width"));
    const int height = static_cast<int>(parse_dim(next_token(in, true), "height"));
    const long maxval = parse_dim(next_token(in, true), "maxval");
    if (maxval > 65535) fail("pgm: maxval out of range");
    const int bytes_per_sample = maxval > 255 ? 2 : 1;

    std::vector<char> payload(static_cast<std::size_t>(width) * height * bytes_per_sample);
    read_exact(in, payload.data(), payload.size());

    ImageTensor image(1, height, width);
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    double* out = image.channel(0);
    const std::size_t count = static_cast<std::size_t>(width) * height;
    for (std::size_t k = 0; k < count; ++k) {
        const unsigned value = bytes_per_sample == 2
                                   ? (static_cast<unsigned>(p[2 * k]) << 8) | p[2 * k + 1]
                                   : p[k];
        out[k] = static_cast<double>(value) / static_cast<double>(maxval);
    }
    return image;
}

ImageTensor read_pgm(const std::vector<std::uint8_t>& bytes) {
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    ImageTensor image = read_pgm(in);
    if (in.peek() != EOF) fail("pgm: trailing bytes after payload");
    return image;
}

void write_pgm(std::ostream& out, const ImageTensor& image, int maxval) {
    if (image.channels() != 1)
        throw std::invalid_argument("pgm: single-channel images only");
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("pgm: maxval must be 255 or 65535");
    out << "P5\n" << image.width() << ' ' << image.height() << '\n' << maxval << '\n';
    const double* in = image.channel(0);
    const std::size_t count = static_cast<std::size_t>(image.width()) * image.height();
    std::vector<unsigned char> payload(count * (maxval > 255 ? 2 : 1));
    for (std::size_t k = 0; k < count; ++k) {
        const double v = in[k];
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("pgm: value outside [0, 1]");
        // std::nearbyint under the default rounding mode gives half-to-even.
        const auto q = static_cast<unsigned>(std::nearbyint(v * maxval));
        if (maxval > 255) {
            payload[2 * k] = static_cast<unsigned char>(q >> 8);
            payload[2 * k + 1] = static_cast<unsigned char>(q & 0xff);
        } else {
            payload[k] = static_cast<unsigned char>(q);
        }
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) fail("pgm: write failed");
}

std::vector<std::uint8_t> write_pgm(const ImageTensor& image, int maxval) {
    std::ostringstream out;
    write_pgm(out, image, maxval);
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

namespace {

enum class Format { Pfm, Pgm };

Format format_for(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".pfm") return Format::Pfm;
    if (ext == ".pgm") return Format::Pgm;
    throw std::invalid_argument("unsupported image extension: " + path);
}

} // namespace

ImageTensor load_image(const std::string& path) {
    const Format format = format_for(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return format == Format::Pfm ? read_pfm(in) : read_pgm(in);
}

void save_image(const std::string& path, const ImageTensor& image) {
    const Format format = format_for(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (format == Format::Pfm) write_pfm(out, image);
    else write_pgm(out, image);
}

} // namespace winstitch

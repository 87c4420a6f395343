#include "devoc/error.hpp"
#include "devoc/raster.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace devoc {
namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r')
                    ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int read_positive_int(const char* what) {
        skip_space_and_comments();
        int value = 0;
        const char* first = bytes_.data() + pos_;
        const char* last = bytes_.data() + bytes_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr == first || value < 1)
            throw Error(Errc::MalformedHeader, std::string("netpbm: bad ") + what);
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

BinaryImage decode_p1(std::string_view bytes, std::size_t pos, int w, int h) {
    BinaryImage img(w, h);
    const long expected = static_cast<long>(w) * h;
    long n = 0;
    for (; pos < bytes.size(); ++pos) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c != '0' && c != '1')
            throw Error(Errc::MalformedHeader, "P1: unexpected character in raster");
        if (n < expected) img.set(static_cast<int>(n / w), static_cast<int>(n % w), c == '1');
        ++n;
    }
    if (n != expected)
        throw Error(Errc::DimensionMismatch, "P1: expected " + std::to_string(expected) +
                                                 " pixels, found " + std::to_string(n));
    return img;
}

BinaryImage decode_p4(std::string_view bytes, std::size_t pos, int w, int h) {
    const std::size_t stride = (static_cast<std::size_t>(w) + 7) / 8;
    const std::size_t need = stride * static_cast<std::size_t>(h);
    if (bytes.size() - pos != need)
        throw Error(Errc::DimensionMismatch, "P4: raster has " + std::to_string(bytes.size() - pos) +
                                                 " bytes, expected " + std::to_string(need));
    BinaryImage img(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto byte = static_cast<unsigned char>(bytes[pos + r * stride + c / 8]);
            img.set(r, c, (byte >> (7 - c % 8)) & 1u);
        }
    }
    return img;
}

BinaryImage decode_p2(std::string_view bytes, std::size_t pos, int w, int h, int maxval) {
    BinaryImage img(w, h);
    const long expected = static_cast<long>(w) * h;
    long n = 0;
    const char* p = bytes.data() + pos;
    const char* end = bytes.data() + bytes.size();
    while (p < end) {
        if (std::isspace(static_cast<unsigned char>(*p))) { ++p; continue; }
        if (*p == '#') {
            while (p < end && *p != '\n') ++p;
            continue;
        }
        int v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || v < 0 || v > maxval)
            throw Error(Errc::MalformedHeader, "P2: bad sample value");
        if (n < expected) img.set(static_cast<int>(n / w), static_cast<int>(n % w), 2 * v < maxval);
        ++n;
        p = next;
    }
    if (n != expected)
        throw Error(Errc::DimensionMismatch, "P2: expected " + std::to_string(expected) +
                                                 " samples, found " + std::to_string(n));
    return img;
}

BinaryImage decode_p5(std::string_view bytes, std::size_t pos, int w, int h, int maxval) {
    const std::size_t bps = maxval < 256 ? 1 : 2;
    const std::size_t need = bps * static_cast<std::size_t>(w) * h;
    if (bytes.size() - pos != need)
        throw Error(Errc::DimensionMismatch, "P5: raster has " + std::to_string(bytes.size() - pos) +
                                                 " bytes, expected " + std::to_string(need));
    BinaryImage img(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t i = pos + bps * (static_cast<std::size_t>(r) * w + c);
            int v = static_cast<unsigned char>(bytes[i]);
            if (bps == 2) v = (v << 8) | static_cast<unsigned char>(bytes[i + 1]);
            img.set(r, c, 2 * v < maxval);
        }
    }
    return img;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::IoFailure, "read failed: " + path.string());
    return bytes;
}

} // namespace

BinaryImage parse_netpbm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw Error(Errc::MalformedHeader, "netpbm: missing magic number");
    const char kind = bytes[1];
    if (kind != '1' && kind != '2' && kind != '4' && kind != '5')
        throw Error(Errc::MalformedHeader, std::string("netpbm: unsupported magic P") + kind);

    HeaderReader header(bytes.substr(2));
    const int w = header.read_positive_int("width");
    const int h = header.read_positive_int("height");
    int maxval = 1;
    if (kind == '2' || kind == '5') {
        maxval = header.read_positive_int("maxval");
        if (maxval > 65535) throw Error(Errc::MalformedHeader, "netpbm: maxval out of range");
    }
    std::size_t pos = 2 + header.pos();

    switch (kind) {
        case '1': return decode_p1(bytes, pos, w, h);
        case '2': return decode_p2(bytes, pos, w, h, maxval);
        default: break;
    }
    // Binary rasters: exactly one whitespace byte separates header and data.
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw Error(Errc::MalformedHeader, "netpbm: missing raster separator");
    ++pos;
    return kind == '4' ? decode_p4(bytes, pos, w, h) : decode_p5(bytes, pos, w, h, maxval);
}

BinaryImage load_pbm(const std::filesystem::path& path) {
    const std::string bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] != '1' && bytes[1] != '4')
        throw Error(Errc::MalformedHeader, "not a PBM file: " + path.string());
    return parse_netpbm(bytes);
}

BinaryImage load_image(const std::filesystem::path& path) { return parse_netpbm(read_all(path)); }

std::string to_pbm(const BinaryImage& img) {
    std::ostringstream out;
    out << "P1\n" << img.width() << ' ' << img.height() << '\n';
    for (int r = 0; r < img.height(); ++r) {
        // Netpbm readers tolerate long lines, but keep rows under 70 chars.
        for (int c = 0; c < img.width(); ++c) {
            if (c > 0) out << ((c % 35 == 0) ? '\n' : ' ');
            out << (img(r, c) ? '1' : '0');
        }
        out << '\n';
    }
    return out.str();
}

void write_pbm(const std::filesystem::path& path, const BinaryImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
    out << to_pbm(img);
    if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

} // namespace devoc

#include "dnet/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dnet/errors.hpp"

namespace dnet {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok += char(c);
    }
    if (tok.empty()) throw DataError("pnm: truncated header");
    return tok;
}

int parse_dim(const std::string& tok, const char* what) {
    try {
        size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size() || v < 1) throw DataError("");
        return v;
    } catch (...) {
        throw DataError(std::string("pnm: bad ") + what + " '" + tok + "'");
    }
}

} // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw DataError("pnm: unsupported magic '" + magic + "' in " + path);
    const int w = parse_dim(next_token(in), "width");
    const int h = parse_dim(next_token(in), "height");
    const int maxval = parse_dim(next_token(in), "maxval");
    if (maxval != 255) throw DataError("pnm: maxval must be 255, got " + std::to_string(maxval));
    // exactly one whitespace byte separates the header from the payload
    Image img(w, h, channels);
    in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (size_t(in.gcount()) != img.pixels.size())
        throw DataError("pnm: truncated payload in " + path);
    return img;
}

void write_pnm(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw DataError("pnm: can only write 1- or 3-channel images");
    if (img.pixels.size() != size_t(img.width) * size_t(img.height) * size_t(img.channels))
        throw DataError("pnm: pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              std::streamsize(img.pixels.size()));
    if (!out) throw DataError("pnm: short write to " + path);
}

void bilinear_resize_plane(const float* src, int in_w, int in_h, float* dst, int out_w,
                           int out_h) {
    const double sx = double(in_w) / double(out_w);
    const double sy = double(in_h) / double(out_h);
    for (int y = 0; y < out_h; ++y) {
        const double fy = (double(y) + 0.5) * sy - 0.5;
        int y0 = int(std::floor(fy));
        const double ty = fy - double(y0);
        int y1 = y0 + 1;
        y0 = std::min(std::max(y0, 0), in_h - 1);
        y1 = std::min(std::max(y1, 0), in_h - 1);
        for (int x = 0; x < out_w; ++x) {
            const double fx = (double(x) + 0.5) * sx - 0.5;
            int x0 = int(std::floor(fx));
            const double tx = fx - double(x0);
            int x1 = x0 + 1;
            x0 = std::min(std::max(x0, 0), in_w - 1);
            x1 = std::min(std::max(x1, 0), in_w - 1);
            const double v =
                (1.0 - ty) * ((1.0 - tx) * src[y0 * in_w + x0] + tx * src[y0 * in_w + x1]) +
                ty * ((1.0 - tx) * src[y1 * in_w + x0] + tx * src[y1 * in_w + x1]);
            dst[y * out_w + x] = float(v);
        }
    }
}

Image bilinear_resize(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw ConfigError("resize target must be positive");
    if (out_w == img.width && out_h == img.height) return img;
    Image out(out_w, out_h, img.channels);
    std::vector<float> src_plane(size_t(img.width) * size_t(img.height));
    std::vector<float> dst_plane(size_t(out_w) * size_t(out_h));
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                src_plane[size_t(y) * size_t(img.width) + size_t(x)] = float(img.px(x, y, c));
        bilinear_resize_plane(src_plane.data(), img.width, img.height, dst_plane.data(), out_w,
                              out_h);
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                const double v = double(dst_plane[size_t(y) * size_t(out_w) + size_t(x)]);
                const double clamped = std::min(255.0, std::max(0.0, v));
                out.px(x, y, c) = uint8_t(std::floor(clamped + 0.5));
            }
    }
    return out;
}

void fill_input_floats(const Image& img, int required_channels, float* dst) {
    if (required_channels != 1 && required_channels != 3)
        throw ConfigError("required channels must be 1 or 3");
    const int64_t hw = int64_t(img.width) * int64_t(img.height);
    constexpr float kInv = 1.0f / 255.0f;
    if (img.channels == required_channels) {
        for (int64_t i = 0; i < hw; ++i)
            for (int c = 0; c < img.channels; ++c)
                dst[c * hw + i] = float(img.pixels[size_t(i) * size_t(img.channels) + size_t(c)]) * kInv;
    } else if (img.channels == 1 && required_channels == 3) {
        for (int64_t i = 0; i < hw; ++i) {
            const float v = float(img.pixels[size_t(i)]) * kInv;
            dst[i] = v;
            dst[hw + i] = v;
            dst[2 * hw + i] = v;
        }
    } else if (img.channels == 3 && required_channels == 1) {
        // ITU BT.601 luma
        for (int64_t i = 0; i < hw; ++i) {
            const float r = float(img.pixels[size_t(i) * 3]) * kInv;
            const float g = float(img.pixels[size_t(i) * 3 + 1]) * kInv;
            const float b = float(img.pixels[size_t(i) * 3 + 2]) * kInv;
            dst[i] = 0.299f * r + 0.587f * g + 0.114f * b;
        }
    } else {
        throw ConfigError("unsupported channel conversion");
    }
}

Tensor to_input_tensor(const Image& img, int required_channels) {
    Tensor t(Shape{1, required_channels, img.height, img.width});
    fill_input_floats(img, required_channels, t.data());
    return t;
}

} // namespace dnet

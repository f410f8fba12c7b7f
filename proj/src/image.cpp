#include "agelab/image.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace agelab {

using nn::Tensor;

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int pnm_int(std::istream& in, const char* what, const std::filesystem::path& path) {
    const std::string tok = pnm_token(in);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("bad " + std::string(what) + " in " + path.string());
    }
}

} // namespace

Tensor load_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image: " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    int channels = 0;
    if (magic[0] == 'P' && magic[1] == '5') {
        channels = 1;
    } else if (magic[0] == 'P' && magic[1] == '6') {
        channels = 3;
    } else {
        throw FormatError("unsupported image magic (want binary P5 or P6): " + path.string());
    }
    const int w = pnm_int(in, "width", path);
    const int h = pnm_int(in, "height", path);
    const int maxval = pnm_int(in, "maxval", path);
    if (maxval != 255) {
        throw FormatError("unsupported maxval " + std::to_string(maxval) + " (want 255): " +
                          path.string());
    }
    // The single whitespace byte after maxval was already consumed by the
    // token reader; raw pixel data starts here.
    const std::size_t n = static_cast<std::size_t>(w) * h * channels;
    std::vector<unsigned char> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw FormatError("truncated pixel data in " + path.string());
    }

    Tensor out({channels, h, w});
    // Interleaved RGB (or flat gray) to planar [C,H,W].
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < channels; ++ch) {
                out[(static_cast<std::size_t>(ch) * h + y) * w + x] =
                    static_cast<float>(bytes[(static_cast<std::size_t>(y) * w + x) * channels + ch]);
            }
        }
    }
    return out;
}

void save_pnm(const Tensor& image, const std::filesystem::path& path) {
    if (image.shape.size() != 3 || (image.shape[0] != 1 && image.shape[0] != 3)) {
        throw ShapeError("save_pnm wants [1,H,W] or [3,H,W], got " +
                         nn::shape_to_string(image.shape));
    }
    const int channels = image.shape[0], h = image.shape[1], w = image.shape[2];
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open image for writing: " + path.string());
    out << (channels == 1 ? "P5" : "P6") << '\n' << w << ' ' << h << '\n' << 255 << '\n';
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * channels);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < channels; ++ch) {
                const float v = image[(static_cast<std::size_t>(ch) * h + y) * w + x];
                const long q = std::lround(v);
                bytes[(static_cast<std::size_t>(y) * w + x) * channels + ch] =
                    static_cast<unsigned char>(q < 0 ? 0 : (q > 255 ? 255 : q));
            }
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing image: " + path.string());
}

Tensor resize_bilinear(const Tensor& image, int out_h, int out_w) {
    if (image.shape.size() != 3) {
        throw ShapeError("resize wants [C,H,W], got " + nn::shape_to_string(image.shape));
    }
    if (out_h < 1 || out_w < 1) throw ShapeError("resize target must be at least 1x1");
    const int c = image.shape[0], h = image.shape[1], w = image.shape[2];
    if (out_h == h && out_w == w) return image;
    Tensor out({c, out_h, out_w});
    const double sy = out_h > 1 ? double(h - 1) / double(out_h - 1) : 0.0;
    const double sx = out_w > 1 ? double(w - 1) / double(out_w - 1) : 0.0;
    for (int ch = 0; ch < c; ++ch) {
        const float* src = image.ptr() + static_cast<std::size_t>(ch) * h * w;
        float* dst = out.ptr() + static_cast<std::size_t>(ch) * out_h * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
            const double fy = oy * sy;
            const int y0 = static_cast<int>(fy);
            const int y1 = y0 + 1 < h ? y0 + 1 : y0;
            const double wy = fy - y0;
            for (int ox = 0; ox < out_w; ++ox) {
                const double fx = ox * sx;
                const int x0 = static_cast<int>(fx);
                const int x1 = x0 + 1 < w ? x0 + 1 : x0;
                const double wx = fx - x0;
                const double top = (1.0 - wx) * src[static_cast<std::size_t>(y0) * w + x0] +
                                   wx * src[static_cast<std::size_t>(y0) * w + x1];
                const double bot = (1.0 - wx) * src[static_cast<std::size_t>(y1) * w + x0] +
                                   wx * src[static_cast<std::size_t>(y1) * w + x1];
                dst[static_cast<std::size_t>(oy) * out_w + ox] =
                    static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

Tensor load_image(const std::filesystem::path& path, int work_h, int work_w) {
    Tensor img = load_pnm(path);
    if (work_h > 0 && work_w > 0 && (img.shape[1] != work_h || img.shape[2] != work_w)) {
        img = resize_bilinear(img, work_h, work_w);
    }
    return img;
}

} // namespace agelab

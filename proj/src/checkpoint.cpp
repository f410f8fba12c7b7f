#include "agelab/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace agelab {

using nn::Head;
using nn::Layer;
using nn::LayerConfig;
using nn::LayerKind;
using nn::Model;
using nn::ModelConfig;
using nn::TensorT;

namespace {

constexpr const char* kMagic = "agelab checkpoint v1";
constexpr const char* kSeparator = "---BLOBS---";

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw FormatError("bad integer list in checkpoint manifest: " + s);
        }
    }
    if (out.empty()) throw FormatError("empty integer list in checkpoint manifest");
    return out;
}

std::string format_rate(float r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(r));
    return buf;
}

// Reads "key=value" off a token; throws when the key differs.
std::string expect_kv(const std::string& token, const std::string& key) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || token.substr(0, eq) != key) {
        throw FormatError("expected '" + key + "=...' in checkpoint manifest, got '" + token + "'");
    }
    return token.substr(eq + 1);
}

long parse_long(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("bad ") + what + " in checkpoint manifest: " + s);
    }
}

void append_le_floats(std::string& out, const TensorT<float>& t) {
    for (std::size_t i = 0; i < t.numel(); ++i) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(t[i]);
        out.push_back(static_cast<char>(bits & 0xff));
        out.push_back(static_cast<char>((bits >> 8) & 0xff));
        out.push_back(static_cast<char>((bits >> 16) & 0xff));
        out.push_back(static_cast<char>((bits >> 24) & 0xff));
    }
}

void read_le_floats(const std::string& blob, std::size_t offset, TensorT<float>& t) {
    if (offset + 4 * t.numel() > blob.size()) {
        throw FormatError("checkpoint blob section too short (truncated file?)");
    }
    for (std::size_t i = 0; i < t.numel(); ++i) {
        const auto* p = reinterpret_cast<const unsigned char*>(blob.data() + offset + 4 * i);
        const std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                                   (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
        t[i] = std::bit_cast<float>(bits);
    }
}

Head parse_head(const std::string& s) {
    if (s == "none") return Head::None;
    if (s == "gender") return Head::Gender;
    if (s == "age") return Head::Age;
    throw FormatError("unknown head '" + s + "' in checkpoint manifest");
}

LayerKind parse_kind(const std::string& s) {
    for (LayerKind k : {LayerKind::Conv2D, LayerKind::MaxPool2D, LayerKind::Dense, LayerKind::ReLU,
                        LayerKind::Dropout, LayerKind::Flatten, LayerKind::Softmax}) {
        if (s == nn::layer_kind_name(k)) return k;
    }
    throw FormatError("unknown layer kind '" + s + "' in checkpoint manifest");
}

} // namespace

void save_checkpoint(const Model<float>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
    std::string manifest;
    std::string blobs;
    manifest += kMagic;
    manifest += '\n';
    manifest += "head " + std::string(nn::head_name(model.config().head)) + '\n';
    manifest += "input_shape " + join_ints(model.config().input_shape) + '\n';
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%" PRIu64, meta.seed);
        manifest += std::string("seed ") + buf + '\n';
    }
    std::string prov = meta.provenance;
    for (char& c : prov) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    manifest += "provenance " + prov + '\n';
    manifest += "layers " + std::to_string(model.layers().size()) + '\n';
    for (std::size_t li = 0; li < model.layers().size(); ++li) {
        const Layer<float>& l = model.layers()[li];
        manifest += "layer " + std::to_string(li) + ' ' + nn::layer_kind_name(l.cfg.kind);
        switch (l.cfg.kind) {
            case LayerKind::Conv2D:
                manifest += " out_channels=" + std::to_string(l.cfg.out_channels) +
                            " kernel=" + std::to_string(l.cfg.kernel) +
                            " stride=" + std::to_string(l.cfg.stride) +
                            " pad=" + std::to_string(l.cfg.pad);
                break;
            case LayerKind::Dense:
                manifest += " units=" + std::to_string(l.cfg.units);
                break;
            case LayerKind::Dropout:
                manifest += " rate=" + format_rate(l.cfg.rate);
                break;
            default:
                break;
        }
        if (nn::layer_has_weights(l.cfg.kind)) {
            manifest += std::string(" frozen=") + (l.frozen ? "1" : "0");
            if (!l.initialized) {
                throw StateError("cannot save " + Model<float>::layer_label(li, l.cfg.kind) +
                                 ": weights were never initialized");
            }
        }
        manifest += '\n';
        if (nn::layer_has_weights(l.cfg.kind)) {
            manifest += "  weights shape=" + join_ints(l.weights.shape) +
                        " offset=" + std::to_string(blobs.size()) +
                        " count=" + std::to_string(l.weights.numel()) + '\n';
            append_le_floats(blobs, l.weights);
            manifest += "  bias shape=" + join_ints(l.bias.shape) +
                        " offset=" + std::to_string(blobs.size()) +
                        " count=" + std::to_string(l.bias.numel()) + '\n';
            append_le_floats(blobs, l.bias);
        }
    }
    manifest += kSeparator;
    manifest += '\n';

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open checkpoint file for writing: " + path.string());
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    out.write(blobs.data(), static_cast<std::streamsize>(blobs.size()));
    out.flush();
    if (!out) throw FormatError("failed writing checkpoint file: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint file: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::stringstream ss(content);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(ss, line)) {
            throw FormatError(std::string("checkpoint manifest ended early, expected ") + what);
        }
        return line;
    };

    if (next_line("magic line") != kMagic) {
        throw FormatError("not an agelab checkpoint: " + path.string());
    }

    auto keyed_line = [&](const char* key) {
        next_line(key);
        const std::string prefix = std::string(key) + ' ';
        if (line.rfind(prefix, 0) != 0) {
            if (line == key) return std::string();
            throw FormatError(std::string("expected '") + key + "' line, got '" + line + "'");
        }
        return line.substr(prefix.size());
    };

    CheckpointMeta meta;
    ModelConfig cfg;
    cfg.head = parse_head(keyed_line("head"));
    cfg.input_shape = parse_ints(keyed_line("input_shape"));
    meta.seed = static_cast<std::uint64_t>(std::strtoull(keyed_line("seed").c_str(), nullptr, 10));
    meta.provenance = keyed_line("provenance");
    const long layer_count = parse_long(keyed_line("layers"), "layer count");
    if (layer_count < 0) throw FormatError("negative layer count in checkpoint manifest");

    struct BlobRef {
        std::vector<int> shape;
        long offset = 0;
        long count = 0;
    };
    std::vector<bool> frozen;
    std::vector<BlobRef> weight_refs, bias_refs;
    std::vector<bool> has_blob;

    for (long li = 0; li < layer_count; ++li) {
        next_line("layer line");
        std::stringstream ls(line);
        std::string tok, kind_s;
        long idx = 0;
        ls >> tok;
        if (tok != "layer") throw FormatError("expected 'layer' line, got '" + line + "'");
        ls >> idx >> kind_s;
        if (idx != li) throw FormatError("layer lines out of order in checkpoint manifest");
        const LayerKind kind = parse_kind(kind_s);
        LayerConfig lc;
        switch (kind) {
            case LayerKind::Conv2D: {
                std::string oc, k, s, p, f;
                ls >> oc >> k >> s >> p >> f;
                lc = LayerConfig::conv2d(
                    static_cast<int>(parse_long(expect_kv(oc, "out_channels"), "out_channels")),
                    static_cast<int>(parse_long(expect_kv(k, "kernel"), "kernel")),
                    static_cast<int>(parse_long(expect_kv(s, "stride"), "stride")),
                    static_cast<int>(parse_long(expect_kv(p, "pad"), "pad")));
                frozen.push_back(expect_kv(f, "frozen") == "1");
                break;
            }
            case LayerKind::Dense: {
                std::string u, f;
                ls >> u >> f;
                lc = LayerConfig::dense(
                    static_cast<int>(parse_long(expect_kv(u, "units"), "units")));
                frozen.push_back(expect_kv(f, "frozen") == "1");
                break;
            }
            case LayerKind::Dropout: {
                std::string r;
                ls >> r;
                lc = LayerConfig::dropout(std::strtof(expect_kv(r, "rate").c_str(), nullptr));
                break;
            }
            case LayerKind::MaxPool2D:
                lc = LayerConfig::maxpool2d();
                break;
            case LayerKind::ReLU:
                lc = LayerConfig::relu();
                break;
            case LayerKind::Flatten:
                lc = LayerConfig::flatten();
                break;
            case LayerKind::Softmax:
                lc = LayerConfig::softmax();
                break;
        }
        cfg.layers.push_back(lc);
        if (nn::layer_has_weights(kind)) {
            auto parse_blob = [&](const char* name) {
                next_line("blob line");
                std::stringstream bs(line);
                std::string nm, sh, off, cnt;
                bs >> nm >> sh >> off >> cnt;
                if (nm != name) {
                    throw FormatError(std::string("expected '") + name + "' blob line, got '" +
                                      line + "'");
                }
                BlobRef ref;
                ref.shape = parse_ints(expect_kv(sh, "shape"));
                ref.offset = parse_long(expect_kv(off, "offset"), "blob offset");
                ref.count = parse_long(expect_kv(cnt, "count"), "blob count");
                long prod = 1;
                for (int d : ref.shape) prod *= d;
                if (prod != ref.count || ref.offset < 0) {
                    throw FormatError(std::string("blob length does not match declared shape for ") +
                                      name + " of layer " + std::to_string(li));
                }
                return ref;
            };
            weight_refs.push_back(parse_blob("weights"));
            bias_refs.push_back(parse_blob("bias"));
            has_blob.push_back(true);
        } else {
            has_blob.push_back(false);
        }
    }

    if (next_line("blob separator") != kSeparator) {
        throw FormatError("missing blob separator in checkpoint manifest");
    }
    const auto blob_start = static_cast<std::size_t>(ss.tellg());
    const std::string blob = content.substr(blob_start);

    LoadedCheckpoint out{Model<float>::build(cfg), meta};
    std::size_t wi = 0;
    auto& layers = out.model.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        if (!has_blob[li]) continue;
        Layer<float>& l = layers[li];
        const BlobRef& wr = weight_refs[wi];
        const BlobRef& br = bias_refs[wi];
        ++wi;
        if (wr.shape != l.weights.shape || br.shape != l.bias.shape) {
            throw FormatError("stored shapes disagree with architecture at " +
                              Model<float>::layer_label(li, l.cfg.kind));
        }
        read_le_floats(blob, static_cast<std::size_t>(wr.offset), l.weights);
        read_le_floats(blob, static_cast<std::size_t>(br.offset), l.bias);
        l.frozen = frozen[wi - 1];
        l.initialized = true;
    }
    return out;
}

LoadedCheckpoint load_checkpoint_into(const std::filesystem::path& path,
                                      const ModelConfig& declared) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    const ModelConfig& got = loaded.model.config();
    if (got.input_shape != declared.input_shape) {
        throw ShapeError("checkpoint input shape " + nn::shape_to_string(got.input_shape) +
                         " does not match declared " + nn::shape_to_string(declared.input_shape));
    }
    if (got.layers.size() != declared.layers.size()) {
        throw ShapeError("checkpoint has " + std::to_string(got.layers.size()) +
                         " layers, declared architecture has " +
                         std::to_string(declared.layers.size()));
    }
    const Model<float> want = Model<float>::build(declared);
    for (std::size_t li = 0; li < got.layers.size(); ++li) {
        if (got.layers[li].kind != declared.layers[li].kind) {
            throw ShapeError(Model<float>::layer_label(li, declared.layers[li].kind) +
                             ": checkpoint stores a " +
                             nn::layer_kind_name(got.layers[li].kind) + " layer instead");
        }
        const Layer<float>& a = loaded.model.layers()[li];
        const Layer<float>& b = want.layers()[li];
        if (a.weights.shape != b.weights.shape || a.bias.shape != b.bias.shape) {
            throw ShapeError(Model<float>::layer_label(li, declared.layers[li].kind) +
                             ": checkpoint weights " + nn::shape_to_string(a.weights.shape) +
                             " do not match declared " + nn::shape_to_string(b.weights.shape));
        }
    }
    if (got.head != declared.head) {
        throw ShapeError(std::string("checkpoint head '") + nn::head_name(got.head) +
                         "' does not match declared head '" + nn::head_name(declared.head) + "'");
    }
    return loaded;
}

} // namespace agelab

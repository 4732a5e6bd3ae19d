#include "sead/nets/bundle.hpp"

#include "sead/core/binary_io.hpp"
#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace sead::nets {

using nlohmann::json;
using nn::Param;
using nn::Tensor;

namespace {

constexpr char kMagic[8] = {'S', 'E', 'A', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

int group_count(int channels, int max_groups) {
    for (int g = std::min(channels, max_groups); g > 1; --g)
        if (channels % g == 0) return g;
    return 1;
}

void append(std::vector<Param*>& out, std::vector<Param*> more) { out.insert(out.end(), more.begin(), more.end()); }

} // namespace

std::string_view to_string(Method m) {
    switch (m) {
    case Method::CAE: return "CAE";
    case Method::ADA: return "ADA";
    case Method::MDADA: return "MDADA";
    case Method::SEADA: return "SEADA";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    if (s == "CAE") return Method::CAE;
    if (s == "ADA") return Method::ADA;
    if (s == "MDADA") return Method::MDADA;
    if (s == "SEADA") return Method::SEADA;
    fail(ErrorCode::InvalidArgument, "unknown trainable method '" + std::string(s) + "' (expected CAE, ADA, MDADA or SEADA)");
}

Shape3 ArchConfig::bottleneck() const {
    const int f = 1 << channels.size();
    return Shape3{shape.depth / f, shape.height / f, shape.width / f};
}

int ArchConfig::flat_features() const { return bottleneck_channels() * static_cast<int>(bottleneck().voxels()); }

void ArchConfig::validate() const {
    require(latent_dim > 0, ErrorCode::InvalidArgument, "latent dimension must be positive");
    require(num_domains() >= 2, ErrorCode::InvalidArgument,
            "architecture needs K >= 2 training domains, got " + std::to_string(num_domains()));
    require(shape.positive(), ErrorCode::InvalidArgument, "architecture volume shape must be positive");
    const int f = 1 << channels.size();
    require(shape.depth % f == 0 && shape.height % f == 0 && shape.width % f == 0, ErrorCode::InvalidArgument,
            "volume shape " + to_string(shape) + " must be divisible by " + std::to_string(f) + " for " +
                std::to_string(channels.size()) + " stride-2 stages");
    for (int c : channels) require(c > 0, ErrorCode::InvalidArgument, "channel counts must be positive");
    for (int c : style_channels) require(c > 0, ErrorCode::InvalidArgument, "style channel counts must be positive");
    const int fs = 1 << style_channels.size();
    require(shape.depth % fs == 0 && shape.height % fs == 0 && shape.width % fs == 0, ErrorCode::InvalidArgument,
            "volume shape must be divisible by the style-encoder stride");
    require(predictor_hidden > 0, ErrorCode::InvalidArgument, "predictor hidden width must be positive");
    require(max_groups >= 1, ErrorCode::InvalidArgument, "max_groups must be >= 1");
    for (std::size_t i = 0; i < domain_names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            require(domain_names[i] != domain_names[j], ErrorCode::InvalidArgument, "duplicate domain name in architecture");
}

ArchConfig arch_with_domains(ArchConfig arch, int num_domains) {
    arch.domain_names.clear();
    for (int k = 0; k < num_domains; ++k) arch.domain_names.push_back("domain" + std::to_string(k));
    return arch;
}

std::vector<Param*> Encoder::params() {
    std::vector<Param*> out;
    body.collect(out);
    return out;
}

std::vector<Param*> Decoder::params() {
    std::vector<Param*> out;
    fc->collect(out);
    trunk.collect(out);
    return out;
}

std::vector<Param*> StyleEncoder::params() {
    std::vector<Param*> out;
    classifier.collect(out);
    head->collect(out);
    return out;
}

std::vector<Param*> DomainPredictor::params() {
    std::vector<Param*> out;
    net.collect(out);
    return out;
}

ModelBundle::ModelBundle(ArchConfig arch, Method method) : arch_(std::move(arch)), method_(method) {
    arch_.validate();
    const auto& a = arch_;
    const int L = a.latent_dim, K = a.num_domains();

    encoder_ = std::make_unique<Encoder>();
    int in_ch = 1;
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
        const std::string n = "encoder.stage" + std::to_string(i);
        auto& conv = encoder_->body.add<nn::Conv3d>(n + ".conv", in_ch, a.channels[i], 3, 2, 1);
        if (i == 0) conv.set_input_grad(false);
        encoder_->body.add<nn::GroupNorm>(n + ".norm", a.channels[i], group_count(a.channels[i], a.max_groups));
        encoder_->body.add<nn::SiLU>();
        in_ch = a.channels[i];
    }
    encoder_->body.add<nn::Reshape>(std::vector<int>{a.flat_features()});
    encoder_->head = &encoder_->body.add<nn::Linear>("encoder.fc", a.flat_features(), L);

    decoder_ = std::make_unique<Decoder>();
    decoder_->fc = std::make_unique<nn::BranchedLinear>("decoder.fc", L, a.flat_features(),
                                                        method == Method::MDADA ? K : 1);
    const Shape3 b = a.bottleneck();
    if (!a.channels.empty()) decoder_->trunk.add<nn::SiLU>();
    decoder_->trunk.add<nn::Reshape>(std::vector<int>{a.bottleneck_channels(), b.depth, b.height, b.width});
    for (std::size_t i = a.channels.size(); i-- > 0;) {
        const int out_ch = i == 0 ? 1 : a.channels[i - 1];
        const std::string n = "decoder.stage" + std::to_string(a.channels.size() - 1 - i);
        decoder_->trunk.add<nn::ConvTranspose3d>(n + ".deconv", a.channels[i], out_ch, 3, 2, 1, 1);
        if (i > 0) {
            decoder_->trunk.add<nn::GroupNorm>(n + ".norm", out_ch, group_count(out_ch, a.max_groups));
            decoder_->trunk.add<nn::SiLU>();
        }
    }
    decoder_->trunk.add<nn::Sigmoid>();

    if (method == Method::SEADA) {
        style_ = std::make_unique<StyleEncoder>();
        int c_in = 1;
        for (std::size_t i = 0; i < a.style_channels.size(); ++i) {
            const std::string n = "style.stage" + std::to_string(i);
            auto& conv = style_->classifier.add<nn::Conv3d>(n + ".conv", c_in, a.style_channels[i], 3, 2, 1);
            if (i == 0) conv.set_input_grad(false);
            style_->classifier.add<nn::GroupNorm>(n + ".norm", a.style_channels[i],
                                                 group_count(a.style_channels[i], a.max_groups));
            style_->classifier.add<nn::SiLU>();
            c_in = a.style_channels[i];
        }
        if (a.style_channels.empty()) {
            style_->classifier.add<nn::Reshape>(std::vector<int>{static_cast<int>(a.shape.voxels())});
            style_->classifier.add<nn::Linear>("style.logits", static_cast<int>(a.shape.voxels()), K);
        } else {
            style_->classifier.add<nn::GlobalAvgPool>();
            style_->classifier.add<nn::Linear>("style.logits", c_in, K);
        }
        style_->head = std::make_unique<nn::Linear>("style.head", K, L);
    }
    if (method != Method::CAE) {
        predictor_ = std::make_unique<DomainPredictor>();
        predictor_->net.add<nn::Linear>("predictor.fc0", L, a.predictor_hidden);
        predictor_->net.add<nn::SiLU>();
        predictor_->net.add<nn::Linear>("predictor.fc1", a.predictor_hidden, K);
    }
}

ModelBundle ModelBundle::create(const ArchConfig& arch, Method method, std::uint64_t seed) {
    ModelBundle b(arch, method);
    // One stream per component so methods sharing a component share its initialization.
    Rng enc(derive_seed_tag(seed, "encoder"));
    b.encoder_->body.init(enc);
    Rng fc(derive_seed_tag(seed, "decoder.fc"));
    b.decoder_->fc->init(fc);
    Rng trunk(derive_seed_tag(seed, "decoder.trunk"));
    b.decoder_->trunk.init(trunk);
    if (b.style_) {
        Rng st(derive_seed_tag(seed, "style"));
        b.style_->classifier.init(st);
        b.style_->head->init(st);
    }
    if (b.predictor_) {
        Rng pr(derive_seed_tag(seed, "predictor"));
        b.predictor_->net.init(pr);
    }
    return b;
}

std::vector<Param*> ModelBundle::style_params() { return style_ ? style_->params() : std::vector<Param*>{}; }

std::vector<Param*> ModelBundle::predictor_params() {
    return predictor_ ? predictor_->params() : std::vector<Param*>{};
}

std::vector<Param*> ModelBundle::all_params() {
    std::vector<Param*> out = encoder_params();
    append(out, decoder_params());
    append(out, style_params());
    append(out, predictor_params());
    return out;
}

std::vector<const Param*> ModelBundle::all_params() const {
    auto mut = const_cast<ModelBundle*>(this)->all_params();
    return {mut.begin(), mut.end()};
}

int ModelBundle::domain_class(std::string_view name) const {
    const auto& names = arch_.domain_names;
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

// ---------------------------------------------------------------------------
// Forward contracts

Tensor to_batch(std::span<const Volume* const> volumes, const Shape3& shape) {
    Tensor x({static_cast<int>(volumes.size()), 1, shape.depth, shape.height, shape.width});
    for (std::size_t n = 0; n < volumes.size(); ++n) {
        require(volumes[n]->shape() == shape, ErrorCode::InvalidArgument,
                "volume shape " + to_string(volumes[n]->shape()) + " does not match architecture shape " +
                    to_string(shape));
        std::copy(volumes[n]->values().begin(), volumes[n]->values().end(), x.data() + n * shape.voxels());
    }
    return x;
}

Tensor to_batch(std::span<const Volume> volumes, const Shape3& shape) {
    std::vector<const Volume*> ptrs;
    for (const auto& v : volumes) ptrs.push_back(&v);
    return to_batch(std::span<const Volume* const>(ptrs), shape);
}

Tensor encode_batch(const ModelBundle& bundle, const Tensor& x) {
    const auto& s = bundle.arch().shape;
    require(x.rank() == 5 && x.dim(1) == 1 && x.dim(2) == s.depth && x.dim(3) == s.height && x.dim(4) == s.width,
            ErrorCode::InvalidArgument, "encode: input " + nn::shape_string(x.shape()) + " does not match " + to_string(s));
    return bundle.encoder().body.infer(x);
}

LatentVector encode(const ModelBundle& bundle, const Volume& x) {
    const Volume* p = &x;
    const Tensor z = encode_batch(bundle, to_batch(std::span<const Volume* const>(&p, 1), bundle.arch().shape));
    return LatentVector(z.values().begin(), z.values().end());
}

std::pair<Tensor, Tensor> style_encode_batch(const ModelBundle& bundle, const Tensor& x) {
    const auto* st = bundle.style();
    require(st != nullptr, ErrorCode::Precondition,
            std::string("style_encode: method ") + std::string(to_string(bundle.method())) + " has no style encoder");
    const auto& s = bundle.arch().shape;
    require(x.rank() == 5 && x.dim(1) == 1 && x.dim(2) == s.depth && x.dim(3) == s.height && x.dim(4) == s.width,
            ErrorCode::InvalidArgument, "style_encode: input " + nn::shape_string(x.shape()) + " does not match " + to_string(s));
    Tensor logits = st->classifier.infer(x);
    Tensor zk = st->head->infer(nn::softmax_rows(logits));
    return {std::move(logits), std::move(zk)};
}

StyleOutput style_encode(const ModelBundle& bundle, const Volume& x) {
    const Volume* p = &x;
    auto [s, zk] = style_encode_batch(bundle, to_batch(std::span<const Volume* const>(&p, 1), bundle.arch().shape));
    return StyleOutput{{s.values().begin(), s.values().end()}, {zk.values().begin(), zk.values().end()}};
}

Tensor decode_batch(const ModelBundle& bundle, const Tensor& z, const std::vector<int>& branch) {
    require(z.rank() == 2 && z.dim(1) == bundle.latent_dim(), ErrorCode::InvalidArgument,
            "decode: latent " + nn::shape_string(z.shape()) + " does not match dimension " +
                std::to_string(bundle.latent_dim()));
    const auto& dec = bundle.decoder();
    return dec.trunk.infer(dec.fc->infer(z, branch));
}

Volume decode(const ModelBundle& bundle, std::span<const float> z_total) {
    require(z_total.size() == static_cast<std::size_t>(bundle.latent_dim()), ErrorCode::InvalidArgument,
            "decode: latent has dimension " + std::to_string(z_total.size()) + ", expected " +
                std::to_string(bundle.latent_dim()));
    require(bundle.method() != Method::MDADA, ErrorCode::Precondition,
            "decode: MD-ADA bundles decode through a domain branch (use decode_mdada)");
    const Tensor z({1, bundle.latent_dim()}, std::vector<float>(z_total.begin(), z_total.end()));
    Tensor y = decode_batch(bundle, z, {0});
    return Volume(bundle.arch().shape, std::vector<float>(y.storage().begin(), y.storage().end()));
}

Volume decode_mdada(const ModelBundle& bundle, std::span<const float> z, int domain_class) {
    require(bundle.method() == Method::MDADA, ErrorCode::Precondition, "decode_mdada requires an MD-ADA bundle");
    require(domain_class >= 0 && domain_class < bundle.num_domains(), ErrorCode::InvalidArgument,
            "decode_mdada: no decoder branch for domain class " + std::to_string(domain_class));
    require(z.size() == static_cast<std::size_t>(bundle.latent_dim()), ErrorCode::InvalidArgument,
            "decode_mdada: latent dimension mismatch");
    const Tensor zt({1, bundle.latent_dim()}, std::vector<float>(z.begin(), z.end()));
    Tensor y = decode_batch(bundle, zt, {domain_class});
    return Volume(bundle.arch().shape, std::vector<float>(y.storage().begin(), y.storage().end()));
}

Volume decode_mdada(const ModelBundle& bundle, std::span<const float> z, std::string_view domain_name) {
    const int k = bundle.domain_class(domain_name);
    require(k >= 0, ErrorCode::InvalidArgument,
            "decode_mdada: '" + std::string(domain_name) + "' is not a training domain; no decoder branch exists");
    return decode_mdada(bundle, z, k);
}

Tensor domain_predict_batch(const ModelBundle& bundle, const Tensor& z) {
    const auto* p = bundle.predictor();
    require(p != nullptr, ErrorCode::Precondition,
            std::string("domain_predict: method ") + std::string(to_string(bundle.method())) + " has no domain predictor");
    require(z.rank() == 2 && z.dim(1) == bundle.latent_dim(), ErrorCode::InvalidArgument,
            "domain_predict: latent " + nn::shape_string(z.shape()) + " does not match dimension " +
                std::to_string(bundle.latent_dim()));
    return p->net.infer(z);
}

std::vector<float> domain_predict(const ModelBundle& bundle, std::span<const float> z) {
    require(z.size() == static_cast<std::size_t>(bundle.latent_dim()), ErrorCode::InvalidArgument,
            "domain_predict: latent has dimension " + std::to_string(z.size()) + ", expected " +
                std::to_string(bundle.latent_dim()));
    const Tensor d = domain_predict_batch(bundle, Tensor({1, bundle.latent_dim()}, std::vector<float>(z.begin(), z.end())));
    return {d.values().begin(), d.values().end()};
}

Volume reconstruct(const ModelBundle& bundle, const Volume& x, int domain_class) {
    LatentVector z = encode(bundle, x);
    switch (bundle.method()) {
    case Method::SEADA: {
        const auto style = style_encode(bundle, x);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += style.latent[i];
        return decode(bundle, z);
    }
    case Method::MDADA: return decode_mdada(bundle, z, domain_class);
    default: return decode(bundle, z);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json arch_to_json(const ArchConfig& a) {
    return json{{"shape", {a.shape.depth, a.shape.height, a.shape.width}},
                {"latent_dim", a.latent_dim},
                {"domain_names", a.domain_names},
                {"channels", a.channels},
                {"style_channels", a.style_channels},
                {"predictor_hidden", a.predictor_hidden},
                {"max_groups", a.max_groups}};
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig a;
    const auto& s = j.at("shape");
    a.shape = Shape3{s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()};
    a.latent_dim = j.at("latent_dim").get<int>();
    a.domain_names = j.at("domain_names").get<std::vector<std::string>>();
    a.channels = j.at("channels").get<std::vector<int>>();
    a.style_channels = j.at("style_channels").get<std::vector<int>>();
    a.predictor_hidden = j.at("predictor_hidden").get<int>();
    a.max_groups = j.at("max_groups").get<int>();
    return a;
}

} // namespace

std::vector<unsigned char> serialize(const ModelBundle& bundle) {
    const auto params = bundle.all_params();
    json tensors = json::array();
    for (const auto* p : params) tensors.push_back({{"name", p->name}, {"shape", p->value.shape()}});
    const json header{{"arch", arch_to_json(bundle.arch())},
                      {"method", std::string(to_string(bundle.method()))},
                      {"step", bundle.step},
                      {"tensors", tensors}};
    io::Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.str(header.dump());
    for (const auto* p : params) w.floats(p->value.values());
    return w.buffer();
}

ModelBundle deserialize(std::span<const unsigned char> bytes) {
    io::Reader r(bytes, "checkpoint");
    char magic[8];
    r.bytes(magic, sizeof magic);
    require(std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorCode::Format, "checkpoint: bad magic");
    const std::uint32_t version = r.u32();
    require(version == kCheckpointVersion, ErrorCode::Format,
            "checkpoint: unsupported version " + std::to_string(version));
    json header;
    try {
        header = json::parse(r.str());
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("checkpoint: corrupt header: ") + e.what());
    }
    ArchConfig arch;
    Method method;
    std::int64_t step = 0;
    try {
        arch = arch_from_json(header.at("arch"));
        method = parse_method(header.at("method").get<std::string>());
        step = header.at("step").get<std::int64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Format, std::string("checkpoint: corrupt header: ") + e.what());
    }
    ModelBundle bundle = ModelBundle::create(arch, method, 0);
    bundle.step = step;
    auto params = bundle.all_params();
    const auto& table = header.at("tensors");
    require(table.size() == params.size(), ErrorCode::Format,
            "checkpoint: tensor count " + std::to_string(table.size()) + " does not match architecture (" +
                std::to_string(params.size()) + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string name = table[i].at("name").get<std::string>();
        const auto shape = table[i].at("shape").get<std::vector<int>>();
        require(name == params[i]->name && shape == params[i]->value.shape(), ErrorCode::Format,
                "checkpoint: tensor '" + name + "' does not match architecture tensor '" + params[i]->name + "'");
        r.floats(params[i]->value.values());
    }
    require(r.remaining() == 0, ErrorCode::Format, "checkpoint: trailing bytes after tensor data");
    return bundle;
}

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle) {
    io::write_file(path, serialize(bundle));
}

ModelBundle load_checkpoint(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

std::uint64_t checkpoint_digest(const ModelBundle& bundle) {
    const auto bytes = serialize(bundle);
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.value();
}

} // namespace sead::nets

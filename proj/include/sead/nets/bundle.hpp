#pragma once

#include "sead/core/volume.hpp"
#include "sead/nn/layers.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sead::nets {

enum class Method { CAE, ADA, MDADA, SEADA };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct ArchConfig {
    Shape3 shape{32, 32, 32};
    int latent_dim = 64;
    // Names of the K training domains, in class-index order.
    std::vector<std::string> domain_names;
    // Strided conv stages of the encoder (mirrored by the decoder). Empty = linear encoder/decoder.
    std::vector<int> channels{16, 32, 64, 128};
    std::vector<int> style_channels{8, 16, 32};
    int predictor_hidden = 128;
    int max_groups = 8;

    int num_domains() const { return static_cast<int>(domain_names.size()); }
    Shape3 bottleneck() const;
    int bottleneck_channels() const { return channels.empty() ? 1 : channels.back(); }
    int flat_features() const;
    void validate() const;
    bool operator==(const ArchConfig&) const = default;
};

// Convenience: an ArchConfig whose domain names are "domain0".."domain{K-1}".
ArchConfig arch_with_domains(ArchConfig arch, int num_domains);

struct Encoder {
    nn::Sequential body;      // conv stages + flatten
    nn::Linear* head = nullptr; // final fully connected map to the latent (owned by body)
    std::vector<nn::Param*> params();
};

struct Decoder {
    std::unique_ptr<nn::BranchedLinear> fc; // first layer after the latent; K branches for MD-ADA
    nn::Sequential trunk;
    std::vector<nn::Param*> params();
};

struct StyleEncoder {
    nn::Sequential classifier; // volume -> s (K logits)
    std::unique_ptr<nn::Linear> head; // softmax(s) -> z_k
    std::vector<nn::Param*> params();
};

struct DomainPredictor {
    nn::Sequential net; // L -> hidden -> K
    std::vector<nn::Param*> params();
};

// The four parametric components; absent components are null for methods that do not use them.
class ModelBundle {
public:
    static ModelBundle create(const ArchConfig& arch, Method method, std::uint64_t seed);

    ModelBundle(ModelBundle&&) = default;
    ModelBundle& operator=(ModelBundle&&) = default;

    const ArchConfig& arch() const { return arch_; }
    Method method() const { return method_; }
    int latent_dim() const { return arch_.latent_dim; }
    int num_domains() const { return arch_.num_domains(); }

    Encoder& encoder() { return *encoder_; }
    const Encoder& encoder() const { return *encoder_; }
    Decoder& decoder() { return *decoder_; }
    const Decoder& decoder() const { return *decoder_; }
    StyleEncoder* style() { return style_.get(); }
    const StyleEncoder* style() const { return style_.get(); }
    DomainPredictor* predictor() { return predictor_.get(); }
    const DomainPredictor* predictor() const { return predictor_.get(); }

    std::vector<nn::Param*> encoder_params() { return encoder_->params(); }
    std::vector<nn::Param*> decoder_params() { return decoder_->params(); }
    std::vector<nn::Param*> style_params();
    std::vector<nn::Param*> predictor_params();
    std::vector<nn::Param*> all_params();
    std::vector<const nn::Param*> all_params() const;

    // Class index of a training-domain name, or -1.
    int domain_class(std::string_view name) const;

    std::int64_t step = 0;

private:
    ModelBundle(ArchConfig arch, Method method);

    ArchConfig arch_;
    Method method_;
    std::unique_ptr<Encoder> encoder_;
    std::unique_ptr<Decoder> decoder_;
    std::unique_ptr<StyleEncoder> style_;
    std::unique_ptr<DomainPredictor> predictor_;
};

using LatentVector = std::vector<float>;

struct StyleOutput {
    std::vector<float> logits; // s, dimension K
    std::vector<float> latent; // z_k, dimension L
};

// Stack volumes into an (N, 1, D, H, W) batch; shapes must match the architecture.
nn::Tensor to_batch(std::span<const Volume> volumes, const Shape3& shape);
nn::Tensor to_batch(std::span<const Volume* const> volumes, const Shape3& shape);

LatentVector encode(const ModelBundle& bundle, const Volume& x);
nn::Tensor encode_batch(const ModelBundle& bundle, const nn::Tensor& x);

StyleOutput style_encode(const ModelBundle& bundle, const Volume& x);
// Returns (s logits (N,K), z_k (N,L)).
std::pair<nn::Tensor, nn::Tensor> style_encode_batch(const ModelBundle& bundle, const nn::Tensor& x);

// Single-branch decoding of z_total (= z, or z + z_k for SE-ADA).
Volume decode(const ModelBundle& bundle, std::span<const float> z_total);
// MD-ADA decoding through the branch of a training domain (by class index or by name).
Volume decode_mdada(const ModelBundle& bundle, std::span<const float> z, int domain_class);
Volume decode_mdada(const ModelBundle& bundle, std::span<const float> z, std::string_view domain_name);
nn::Tensor decode_batch(const ModelBundle& bundle, const nn::Tensor& z, const std::vector<int>& branch);

std::vector<float> domain_predict(const ModelBundle& bundle, std::span<const float> z);
nn::Tensor domain_predict_batch(const ModelBundle& bundle, const nn::Tensor& z);

// Reconstruction through the method's own decoding path (z, z + z_k, or the domain branch).
// domain_class is only consulted for MD-ADA.
Volume reconstruct(const ModelBundle& bundle, const Volume& x, int domain_class);

// Checkpoint: magic, JSON header (arch, method, step, tensor table), raw little-endian float32 tensors.
std::vector<unsigned char> serialize(const ModelBundle& bundle);
ModelBundle deserialize(std::span<const unsigned char> bytes);
void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::filesystem::path& path);
std::uint64_t checkpoint_digest(const ModelBundle& bundle);

} // namespace sead::nets

#include "sead/train/trainer.hpp"

#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace sead::train {

using nets::Method;
using nn::Tensor;

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorCode::InvalidArgument, "epochs must be >= 1");
    require(batch_size >= 2, ErrorCode::InvalidArgument, "batch_size must be >= 2");
    require(lr_stage1 > 0 && lr_stage2 > 0 && lr_stage3 > 0, ErrorCode::InvalidArgument, "learning rates must be positive");
    require(eps_stage3 > 0, ErrorCode::InvalidArgument, "eps_stage3 must be positive");
    require(w_recon >= 0 && w_style >= 0 && w_conf >= 0, ErrorCode::InvalidArgument, "loss weights must be >= 0");
    require(checkpoint_every >= 0, ErrorCode::InvalidArgument, "checkpoint_every must be >= 0");
    require(method == Method::CAE || cn_only_stage3, ErrorCode::InvalidArgument,
            "stage 3 is CN-only for every adversarial method");
}

Batch make_batch(std::span<const Sample* const> samples, const nets::ArchConfig& arch,
                 const std::vector<int>& class_of_domain) {
    Batch b;
    std::vector<const Volume*> vols;
    for (const Sample* s : samples) {
        require(s->domain >= 0 && s->domain < static_cast<int>(class_of_domain.size()) &&
                    class_of_domain[s->domain] >= 0,
                ErrorCode::Precondition, "sample of patient '" + s->patient_id + "' is not from a training domain");
        vols.push_back(&s->volume);
        b.domain_class.push_back(class_of_domain[s->domain]);
        b.disease.push_back(s->disease);
    }
    b.x = nets::to_batch(std::span<const Volume* const>(vols), arch.shape);
    return b;
}

namespace {

void zero(const std::vector<nn::Param*>& ps) {
    for (auto* p : ps) p->zero_grad();
}

std::vector<nn::Param*> concat(std::vector<nn::Param*> a, const std::vector<nn::Param*>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Mean cross-entropy of logits against integer targets; writes d(loss)/d(logits) scaled by weight.
double cross_entropy(const Tensor& logits, const std::vector<int>& target, double weight, Tensor* grad) {
    const int N = logits.dim(0), K = logits.dim(1);
    const Tensor p = nn::softmax_rows(logits);
    if (grad) *grad = Tensor(logits.shape());
    double loss = 0.0;
    for (int n = 0; n < N; ++n) {
        const std::size_t o = static_cast<std::size_t>(n) * K;
        loss -= std::log(std::max(static_cast<double>(p[o + target[n]]), 1e-30));
        if (grad) {
            for (int k = 0; k < K; ++k) {
                (*grad)[o + k] = static_cast<float>(weight * (p[o + k] - (k == target[n] ? 1.0 : 0.0)) / N);
            }
        }
    }
    return loss / N;
}

// Mean cross-entropy of softmax(logits) against the uniform distribution; floor is log K.
double uniform_cross_entropy(const Tensor& logits, double weight, Tensor* grad) {
    const int N = logits.dim(0), K = logits.dim(1);
    if (grad) *grad = Tensor(logits.shape());
    double loss = 0.0;
    for (int n = 0; n < N; ++n) {
        const float* row = logits.data() + static_cast<std::size_t>(n) * K;
        const double mx = *std::max_element(row, row + K);
        double total = 0.0;
        for (int k = 0; k < K; ++k) total += std::exp(row[k] - mx);
        const double lse = mx + std::log(total);
        for (int k = 0; k < K; ++k) {
            loss -= (row[k] - lse) / K;
            if (grad) {
                const double p = std::exp(row[k] - lse);
                (*grad)[static_cast<std::size_t>(n) * K + k] = static_cast<float>(weight * (p - 1.0 / K) / N);
            }
        }
    }
    return loss / N;
}

} // namespace

Trainer::Trainer(nets::ModelBundle& bundle, TrainConfig config)
    : bundle_(bundle), config_(std::move(config)), opt1_(config_.lr_stage1), opt2_(config_.lr_stage2),
      opt3_(config_.lr_stage3, 0.9, 0.999, config_.eps_stage3) {
    config_.validate();
    require(config_.method == bundle.method(), ErrorCode::InvalidArgument,
            std::string("train config method ") + std::string(nets::to_string(config_.method)) +
                " does not match bundle method " + std::string(nets::to_string(bundle.method())));
}

void Trainer::check_finite(const LossRecord& rec, int stage) const {
    const bool ok = std::isfinite(rec.recon_loss) && std::isfinite(rec.style_loss) && std::isfinite(rec.domain_loss) &&
                    std::isfinite(rec.confusion_loss);
    if (!ok) {
        std::ostringstream msg;
        msg << "stage " << stage << " step " << rec.step << ": non-finite loss (recon=" << rec.recon_loss
            << ", style=" << rec.style_loss << ", domain=" << rec.domain_loss << ", confusion=" << rec.confusion_loss
            << ")";
        fail(ErrorCode::Numeric, msg.str());
    }
}

LossRecord Trainer::stage1_step(const Batch& batch) {
    const int N = batch.size();
    require(N >= 1, ErrorCode::InvalidArgument, "stage 1: empty batch");
    auto& enc = bundle_.encoder();
    auto& dec = bundle_.decoder();
    auto* style = bundle_.style();
    const auto enc_p = bundle_.encoder_params();
    const auto dec_p = bundle_.decoder_params();
    const auto sty_p = bundle_.style_params();
    zero(enc_p);
    zero(dec_p);
    zero(sty_p);

    LossRecord rec;
    rec.step = bundle_.step;
    rec.stage = 1;

    Tensor z = enc.body.forward(batch.x);
    Tensor p_style;
    Tensor style_grad;
    if (style) {
        const Tensor s = style->classifier.forward(batch.x);
        rec.style_loss = cross_entropy(s, batch.domain_class, config_.w_style, &style_grad);
        p_style = nn::softmax_rows(s);
        const Tensor zk = style->head->forward(p_style);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += zk[i];
    }
    std::vector<int> branch(N, 0);
    if (bundle_.method() == Method::MDADA) branch = batch.domain_class;
    const Tensor recon = dec.trunk.forward(dec.fc->forward(z, branch));

    const std::size_t total = recon.size();
    Tensor d_recon(recon.shape());
    double sse = 0.0;
    const double scale = 2.0 * config_.w_recon / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double diff = static_cast<double>(recon[i]) - batch.x[i];
        sse += diff * diff;
        d_recon[i] = static_cast<float>(scale * diff);
    }
    rec.recon_loss = sse / static_cast<double>(total);
    check_finite(rec, 1);

    const Tensor dz = dec.fc->backward(dec.trunk.backward(d_recon));
    enc.body.backward(dz);
    if (style) {
        // z_k = head(softmax(s)); chain through the softmax Jacobian, then add the supervised term.
        const Tensor dp = style->head->backward(dz);
        const int K = bundle_.num_domains();
        Tensor ds = style_grad;
        for (int n = 0; n < N; ++n) {
            const std::size_t o = static_cast<std::size_t>(n) * K;
            double dot = 0.0;
            for (int k = 0; k < K; ++k) dot += static_cast<double>(p_style[o + k]) * dp[o + k];
            for (int k = 0; k < K; ++k) ds[o + k] += static_cast<float>(p_style[o + k] * (dp[o + k] - dot));
        }
        style->classifier.backward(ds);
    }
    opt1_.step(concat(concat(enc_p, dec_p), sty_p));
    return rec;
}

LossRecord Trainer::stage2_step(const Batch& batch) {
    auto* pred = bundle_.predictor();
    require(pred != nullptr, ErrorCode::Precondition,
            std::string("stage 2 requires a domain predictor; method ") + std::string(nets::to_string(bundle_.method())) +
                " has none");
    const auto pred_p = bundle_.predictor_params();
    zero(pred_p);

    LossRecord rec;
    rec.step = bundle_.step;
    rec.stage = 2;
    const Tensor z = bundle_.encoder().body.infer(batch.x);
    const Tensor d = pred->net.forward(z);
    Tensor dd;
    rec.domain_loss = cross_entropy(d, batch.domain_class, 1.0, &dd);
    check_finite(rec, 2);
    pred->net.backward(dd);
    opt2_.step(pred_p);
    return rec;
}

LossRecord Trainer::stage3_step(const Batch& cn_batch) {
    auto* pred = bundle_.predictor();
    require(pred != nullptr, ErrorCode::Precondition,
            std::string("stage 3 requires a domain predictor; method ") + std::string(nets::to_string(bundle_.method())) +
                " has none");
    if (config_.cn_only_stage3) {
        for (int n = 0; n < cn_batch.size(); ++n) {
            require(cn_batch.disease[n] == Disease::CN, ErrorCode::Precondition,
                    "stage 3 batch row " + std::to_string(n) + " has disease " +
                        std::string(to_string(cn_batch.disease[n])) + "; only CN samples may drive domain confusion");
        }
    }
    const auto enc_p = bundle_.encoder_params();
    const auto pred_p = bundle_.predictor_params();
    zero(enc_p);
    zero(pred_p);

    LossRecord rec;
    rec.step = bundle_.step;
    rec.stage = 3;
    const Tensor z = bundle_.encoder().body.forward(cn_batch.x);
    const Tensor d = pred->net.forward(z);
    Tensor dd;
    rec.confusion_loss = uniform_cross_entropy(d, config_.w_conf, &dd);
    rec.domain_loss = cross_entropy(d, cn_batch.domain_class, 1.0, nullptr);
    check_finite(rec, 3);
    const Tensor dz = pred->net.backward(dd);
    bundle_.encoder().body.backward(dz);
    opt3_.step(enc_p);
    return rec;
}

int stages_per_batch(Method method) { return method == Method::CAE ? 1 : 3; }

std::size_t batches_per_epoch(std::size_t n, int batch_size) {
    const std::size_t bs = static_cast<std::size_t>(batch_size);
    if (n < 2) return 0;
    if (n <= bs) return 1;
    const std::size_t full = n / bs, rem = n % bs;
    return rem >= 2 ? full + 1 : full; // a single leftover row joins the last batch
}

TrainResult train(std::span<const Sample> samples, const std::vector<DomainId>& train_domains, nets::ArchConfig arch,
                  const TrainConfig& config, const CheckpointFn& on_checkpoint) {
    config.validate();
    arch.domain_names.clear();
    int max_index = -1;
    for (const auto& d : train_domains) {
        arch.domain_names.push_back(d.name);
        max_index = std::max(max_index, d.index);
    }
    std::vector<int> class_of_domain(static_cast<std::size_t>(max_index + 1), -1);
    for (std::size_t k = 0; k < train_domains.size(); ++k) class_of_domain[train_domains[k].index] = static_cast<int>(k);

    require(samples.size() >= 2, ErrorCode::Precondition, "training needs at least 2 samples");
    std::vector<const Sample*> all;
    std::map<int, std::vector<std::size_t>> cn_by_class;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        require(s.domain >= 0 && s.domain <= max_index && class_of_domain[s.domain] >= 0, ErrorCode::Precondition,
                "training sample of patient '" + s.patient_id + "' is not from a training domain");
        all.push_back(&s);
        if (s.disease == Disease::CN) cn_by_class[class_of_domain[s.domain]].push_back(i);
    }
    if (config.method != Method::CAE) {
        for (std::size_t k = 0; k < train_domains.size(); ++k) {
            require(cn_by_class.count(static_cast<int>(k)) > 0, ErrorCode::Precondition,
                    "training domain '" + train_domains[k].name + "' has no CN samples; stage 3 cannot run");
        }
    }

    TrainResult result{nets::ModelBundle::create(arch, config.method, config.seed), {}};
    auto& bundle = result.bundle;
    Trainer trainer(bundle, config);
    Rng order_rng(derive_seed_tag(config.seed, "batch-order"));
    Rng cn_rng(derive_seed_tag(config.seed, "cn-resample"));

    std::vector<std::size_t> cn_pool;
    for (const auto& [k, idx] : cn_by_class) cn_pool.insert(cn_pool.end(), idx.begin(), idx.end());
    std::sort(cn_pool.begin(), cn_pool.end());

    const std::size_t n_batches = batches_per_epoch(all.size(), config.batch_size);
    std::vector<std::size_t> order(all.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle(order, order_rng);
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t begin = b * config.batch_size;
            const std::size_t end = b + 1 == n_batches ? order.size() : begin + config.batch_size;
            std::vector<const Sample*> rows;
            std::vector<std::size_t> batch_cn;
            for (std::size_t i = begin; i < end; ++i) {
                rows.push_back(all[order[i]]);
                if (all[order[i]]->disease == Disease::CN) batch_cn.push_back(order[i]);
            }
            const Batch batch = make_batch(rows, bundle.arch(), class_of_domain);

            auto record = [&](LossRecord r) {
                r.epoch = epoch;
                result.history.push_back(r);
            };
            record(trainer.stage1_step(batch));
            if (config.method != Method::CAE) {
                record(trainer.stage2_step(batch));
                // CN rows of this batch resampled with replacement to the full batch size.
                const auto& pool = batch_cn.empty() ? cn_pool : batch_cn;
                std::vector<const Sample*> cn_rows;
                for (int i = 0; i < config.batch_size; ++i) cn_rows.push_back(all[pool[uniform_index(cn_rng, pool.size())]]);
                record(trainer.stage3_step(make_batch(cn_rows, bundle.arch(), class_of_domain)));
            }
            ++bundle.step;
        }
        const bool last = epoch + 1 == config.epochs;
        if (on_checkpoint && (last || (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0))) {
            on_checkpoint(bundle, epoch + 1);
        }
    }
    return result;
}

std::string history_to_tsv(const std::vector<LossRecord>& history) {
    std::string out = "step\tepoch\tstage\trecon_loss\tstyle_loss\tdomain_loss\tconfusion_loss\n";
    char line[256];
    for (const auto& r : history) {
        std::snprintf(line, sizeof line, "%lld\t%d\t%d\t%.9g\t%.9g\t%.9g\t%.9g\n", static_cast<long long>(r.step),
                      r.epoch, r.stage, r.recon_loss, r.style_loss, r.domain_loss, r.confusion_loss);
        out += line;
    }
    return out;
}

LdrStore extract_ldrs(const nets::ModelBundle& bundle, std::span<const Sample> samples,
                      const std::vector<DomainId>& domain_table) {
    LdrStore out;
    out.method = std::string(nets::to_string(bundle.method()));
    out.latent_dim = bundle.latent_dim();
    out.domain_table = domain_table;
    constexpr std::size_t kChunk = 16;
    for (std::size_t begin = 0; begin < samples.size(); begin += kChunk) {
        const std::size_t end = std::min(samples.size(), begin + kChunk);
        std::vector<const Volume*> vols;
        for (std::size_t i = begin; i < end; ++i) {
            vols.push_back(&samples[i].volume);
            out.patient_ids.push_back(samples[i].patient_id);
            out.diseases.push_back(samples[i].disease);
            out.domains.push_back(samples[i].domain);
        }
        const Tensor z = nets::encode_batch(bundle, nets::to_batch(std::span<const Volume* const>(vols), bundle.arch().shape));
        out.values.insert(out.values.end(), z.values().begin(), z.values().end());
    }
    out.validate();
    return out;
}

} // namespace sead::train

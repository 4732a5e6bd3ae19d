#include "sead/phantom/phantom.hpp"

#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <numbers>
#include <sstream>

namespace sead::phantom {

namespace {

double smoothstep_inside(double r, double width) {
    // ~1 well inside r < 1, ~0 outside, logistic transition.
    return 1.0 / (1.0 + std::exp((r - 1.0) / width));
}

struct Deformation {
    std::array<double, 3> freq{};
    std::array<double, 3> phase{};
    double amp = 0.0;
};

} // namespace

void DomainEffect::validate() const {
    require(gain > 0.0 && std::isfinite(gain), ErrorCode::InvalidArgument, "domain gain must be positive");
    require(std::isfinite(bias), ErrorCode::InvalidArgument, "domain bias must be finite");
    require(noise_sigma >= 0.0, ErrorCode::InvalidArgument, "domain noise_sigma must be >= 0");
    require(blur_sigma >= 0.0, ErrorCode::InvalidArgument, "domain blur_sigma must be >= 0");
}

void PhantomConfig::validate() const {
    require(shape.positive(), ErrorCode::InvalidArgument, "phantom shape must be positive");
    require(std::min({shape.depth, shape.height, shape.width}) >= 8, ErrorCode::InvalidArgument,
            "phantom shape must be at least 8 voxels per axis");
    require(domains.size() >= 2, ErrorCode::InvalidArgument, "phantom config needs K >= 2 domains");
    require(scans_per_patient >= 1, ErrorCode::InvalidArgument, "scans_per_patient must be >= 1");
    require(ad_atrophy >= 0.0 && ad_atrophy <= 1.0 && mci_atrophy >= 0.0 && mci_atrophy <= 1.0,
            ErrorCode::InvalidArgument, "atrophy factors must lie in [0, 1]");
    require(lesion_radius_fraction > 0.0 && lesion_radius_fraction < 0.25, ErrorCode::InvalidArgument,
            "lesion_radius_fraction must lie in (0, 0.25)");
    int n_train = 0;
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const auto& d = domains[i];
        d.effect.validate();
        require(!d.name.empty(), ErrorCode::InvalidArgument, "domain names must be non-empty");
        require(d.cn >= 0 && d.ad >= 0 && d.mci >= 0, ErrorCode::InvalidArgument, "sample counts must be >= 0");
        require(d.cn >= 1, ErrorCode::Precondition,
                "domain '" + d.name + "' has no CN samples; adversarial training requires CN data in every domain");
        for (std::size_t j = 0; j < i; ++j) {
            require(domains[j].name != d.name, ErrorCode::InvalidArgument, "duplicate domain name '" + d.name + "'");
            require(!(domains[j].effect == d.effect), ErrorCode::InvalidArgument,
                    "domains '" + domains[j].name + "' and '" + d.name + "' have identical effects");
        }
        if (d.train) ++n_train;
    }
    require(n_train >= 2, ErrorCode::InvalidArgument, "phantom config needs at least 2 training domains");
}

PhantomConfig default_phantom_config() {
    PhantomConfig c;
    // Gain, bias and noise rise together so raw mean intensity orders like bias; blur varies independently.
    c.domains = {
        {"siteA-1.5T", true, {0.800, -0.100, 0.000, 0.00}, 40, 40, 0},
        {"siteB-3.0T", true, {0.875, -0.067, 0.010, 1.50}, 40, 40, 0},
        {"siteC-1.5T", false, {0.950, -0.033, 0.015, 0.50}, 20, 20, 0},
        {"siteD-3.0T", true, {1.025, 0.000, 0.020, 1.00}, 40, 40, 0},
        {"siteE-1.5T", true, {1.100, 0.033, 0.030, 0.00}, 40, 40, 0},
        {"siteF-3.0T", false, {1.175, 0.067, 0.040, 1.25}, 20, 20, 0},
        {"siteG-3.0T", true, {1.250, 0.100, 0.050, 0.75}, 40, 40, 0},
    };
    return c;
}

Volume generate_base_anatomy(std::uint64_t patient_seed, Shape3 shape) {
    require(shape.positive(), ErrorCode::InvalidArgument, "anatomy shape must be positive");
    Rng rng(derive_seed_tag(patient_seed, "anatomy"));
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const std::array<double, 3> radii{0.78 + 0.06 * u(rng), 0.82 + 0.06 * u(rng), 0.74 + 0.06 * u(rng)};
    const std::array<double, 3> offset{0.04 * u(rng), 0.04 * u(rng), 0.04 * u(rng)};
    const double wm_frac = 0.68 + 0.05 * u(rng);
    const double vent_frac = 0.22 + 0.06 * u(rng);
    const double gm_level = 0.55 + 0.05 * u(rng);
    const double wm_level = 0.88 + 0.05 * u(rng);
    const double vent_level = 0.18 + 0.04 * u(rng);

    std::array<Deformation, 4> deform;
    for (auto& w : deform) {
        for (int a = 0; a < 3; ++a) {
            w.freq[a] = std::round(1.0 + 1.5 * (u(rng) + 1.0)); // 1..4 cycles
            w.phase[a] = std::numbers::pi * u(rng);
        }
        w.amp = 0.03 * u(rng);
    }

    Volume vol(shape, 0.0f);
    const std::array<int, 3> dims{shape.depth, shape.height, shape.width};
    for (int d = 0; d < shape.depth; ++d) {
        for (int h = 0; h < shape.height; ++h) {
            for (int w = 0; w < shape.width; ++w) {
                const std::array<int, 3> idx{d, h, w};
                std::array<double, 3> p{};
                for (int a = 0; a < 3; ++a) p[a] = (idx[a] + 0.5) / dims[a] * 2.0 - 1.0 - offset[a];
                double warp = 0.0;
                for (const auto& wv : deform) {
                    warp += wv.amp * std::sin(wv.freq[0] * p[0] + wv.phase[0]) *
                            std::sin(wv.freq[1] * p[1] + wv.phase[1]) * std::sin(wv.freq[2] * p[2] + wv.phase[2]);
                }
                double r2 = 0.0;
                for (int a = 0; a < 3; ++a) r2 += (p[a] / radii[a]) * (p[a] / radii[a]);
                const double r = std::sqrt(r2) + warp;

                const double brain = smoothstep_inside(r, 0.03);
                const double wm = smoothstep_inside(r / wm_frac, 0.04);
                const double vent = smoothstep_inside(r / vent_frac, 0.06);
                double value = brain * (gm_level + wm * (wm_level - gm_level));
                value += vent * (vent_level - value);
                vol.at(d, h, w) = static_cast<float>(std::clamp(value, 0.0, 1.0));
            }
        }
    }
    return vol;
}

Volume apply_disease(const Volume& vol, const DiseaseEffect& effect) {
    require(effect.atrophy_factor >= 0.0 && effect.atrophy_factor <= 1.0, ErrorCode::InvalidArgument,
            "atrophy_factor must lie in [0, 1]");
    require(effect.lesion_radius > 0.0, ErrorCode::InvalidArgument, "lesion_radius must be positive");
    const auto& s = vol.shape();
    const std::array<int, 3> dims{s.depth, s.height, s.width};
    for (int a = 0; a < 3; ++a) {
        const double c = effect.lesion_center[a];
        require(c - effect.lesion_radius >= 0.0 && c + effect.lesion_radius <= dims[a] - 1.0, ErrorCode::InvalidArgument,
                "lesion sphere extends outside the volume on axis " + std::to_string(a));
    }
    Volume out = vol;
    if (effect.atrophy_factor == 1.0) return out;
    const double R = effect.lesion_radius;
    for (int d = 0; d < s.depth; ++d) {
        for (int h = 0; h < s.height; ++h) {
            for (int w = 0; w < s.width; ++w) {
                const double dd = d - effect.lesion_center[0];
                const double dh = h - effect.lesion_center[1];
                const double dw = w - effect.lesion_center[2];
                const double r = std::sqrt(dd * dd + dh * dh + dw * dw);
                if (r >= R + kLesionMargin) continue;
                double weight = 1.0;
                if (r > R) weight = 0.5 * (1.0 + std::cos(std::numbers::pi * (r - R) / kLesionMargin));
                const double factor = 1.0 - (1.0 - effect.atrophy_factor) * weight;
                out.at(d, h, w) = static_cast<float>(vol.at(d, h, w) * factor);
            }
        }
    }
    return out;
}

Volume gaussian_blur(const Volume& vol, double sigma) {
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "blur sigma must be >= 0");
    if (sigma == 0.0) return vol;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (double& k : kernel) k /= total;

    const auto& s = vol.shape();
    const std::array<int, 3> dims{s.depth, s.height, s.width};
    std::vector<double> cur(vol.values().begin(), vol.values().end());
    std::vector<double> next(cur.size());
    const std::array<std::size_t, 3> strides{static_cast<std::size_t>(s.height) * s.width,
                                             static_cast<std::size_t>(s.width), 1};
    for (int axis = 0; axis < 3; ++axis) {
        for (int d = 0; d < s.depth; ++d) {
            for (int h = 0; h < s.height; ++h) {
                for (int w = 0; w < s.width; ++w) {
                    const std::array<int, 3> idx{d, h, w};
                    const std::size_t base = vol.index(d, h, w) - idx[axis] * strides[axis];
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        const int j = std::clamp(idx[axis] + k, 0, dims[axis] - 1);
                        acc += kernel[k + radius] * cur[base + j * strides[axis]];
                    }
                    next[vol.index(d, h, w)] = acc;
                }
            }
        }
        std::swap(cur, next);
    }
    std::vector<float> out(cur.size());
    std::transform(cur.begin(), cur.end(), out.begin(), [](double v) { return static_cast<float>(v); });
    return Volume(s, std::move(out), vol.voxel_size_mm());
}

Volume apply_domain(const Volume& vol, const DomainEffect& effect, std::uint64_t scan_seed) {
    effect.validate();
    Volume out = gaussian_blur(vol, effect.blur_sigma);
    Rng rng(derive_seed_tag(scan_seed, "scan-noise"));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (float& v : out.values()) {
        double x = static_cast<double>(v) * effect.gain + effect.bias;
        if (effect.noise_sigma > 0.0) x += effect.noise_sigma * noise(rng);
        v = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
    return out;
}

DiseaseEffect disease_effect_for(Disease disease, std::uint64_t patient_seed, const PhantomConfig& config) {
    const auto& s = config.shape;
    const std::array<int, 3> dims{s.depth, s.height, s.width};
    const double radius = config.lesion_radius_fraction * std::min({s.depth, s.height, s.width});
    Rng rng(derive_seed_tag(patient_seed, "lesion"));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // Fixed anatomical site (normalized coords) with a small per-patient jitter; stays inside the white matter.
    const std::array<double, 3> site{0.05, -0.22, 0.24};
    DiseaseEffect e;
    for (int a = 0; a < 3; ++a) {
        const double p = site[a] + 0.03 * u(rng);
        e.lesion_center[a] = (p + 1.0) * 0.5 * dims[a] - 0.5;
    }
    e.lesion_radius = radius;
    switch (disease) {
    case Disease::CN: e.atrophy_factor = 1.0; break;
    case Disease::AD: e.atrophy_factor = config.ad_atrophy; break;
    case Disease::MCI: e.atrophy_factor = config.mci_atrophy; break;
    }
    return e;
}

VolumeStore generate_dataset(const PhantomConfig& config) {
    config.validate();
    VolumeStore store;
    auto& m = store.manifest;
    m.shape = config.shape;
    m.voxel_size_mm = config.voxel_size_mm;
    for (std::size_t k = 0; k < config.domains.size(); ++k) {
        m.domains.push_back(DomainId{static_cast<int>(k), config.domains[k].name, config.domains[k].train});
    }

    for (std::size_t k = 0; k < config.domains.size(); ++k) {
        const auto& spec = config.domains[k];
        const std::array<std::pair<Disease, int>, 3> cells{
            {{Disease::CN, spec.cn}, {Disease::AD, spec.ad}, {Disease::MCI, spec.mci}}};
        for (const auto& [disease, count] : cells) {
            for (int p = 0; p < count; ++p) {
                // Seeds are a pure function of (master, domain, disease, patient, scan): order-independent.
                const std::uint64_t patient_seed =
                    derive_seed(config.seed, 0x70617469656e74ULL, k, static_cast<int>(disease), p);
                std::ostringstream pid;
                pid << "d" << k << "-" << to_string(disease) << "-" << std::setw(4) << std::setfill('0') << p;
                Volume anatomy = generate_base_anatomy(patient_seed, config.shape);
                anatomy = apply_disease(anatomy, disease_effect_for(disease, patient_seed, config));
                for (int scan = 0; scan < config.scans_per_patient; ++scan) {
                    const std::uint64_t scan_seed = derive_seed(patient_seed, 0x7363616eULL, scan);
                    Volume v = apply_domain(anatomy, spec.effect, scan_seed);
                    if (config.normalize) v = normalize_intensity(v);
                    std::ostringstream file;
                    file << pid.str() << "-s" << scan << ".f32";
                    m.samples.push_back(SampleInfo{file.str(), pid.str(), disease, static_cast<int>(k)});
                    store.volumes.emplace_back(config.shape, std::move(v.values()), config.voxel_size_mm);
                }
            }
        }
    }
    m.validate();
    return store;
}

std::string count_table(const DatasetManifest& manifest) {
    struct Cell {
        int scans = 0;
        std::set<std::string> patients;
    };
    std::map<std::pair<int, int>, Cell> cells;
    std::map<int, Cell> totals;
    for (const auto& s : manifest.samples) {
        auto& c = cells[{s.domain, static_cast<int>(s.disease)}];
        ++c.scans;
        c.patients.insert(s.patient_id);
        ++totals[s.domain].scans;
        totals[s.domain].patients.insert(s.patient_id);
    }
    auto fmt = [](const Cell& c) {
        if (c.scans == 0) return std::string("-");
        return std::to_string(c.scans) + " (" + std::to_string(c.patients.size()) + ")";
    };
    std::size_t name_w = 6;
    for (const auto& d : manifest.domains) name_w = std::max(name_w, d.name.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_w)) << "domain" << std::right;
    for (const char* h : {"CN", "AD", "MCI", "total"}) out << std::setw(12) << h;
    out << std::setw(7) << "train" << std::setw(6) << "test" << "\n";
    int grand = 0;
    for (const auto& d : manifest.domains) {
        out << std::left << std::setw(static_cast<int>(name_w)) << d.name << std::right;
        for (int dis = 0; dis < 3; ++dis) {
            auto it = cells.find({d.index, dis});
            out << std::setw(12) << (it == cells.end() ? std::string("-") : fmt(it->second));
        }
        const auto t = totals.find(d.index);
        out << std::setw(12) << (t == totals.end() ? std::string("-") : fmt(t->second));
        out << std::setw(7) << (d.train ? "x" : "") << std::setw(6) << (d.train ? "" : "x") << "\n";
        if (t != totals.end()) grand += t->second.scans;
    }
    out << "total scans: " << grand << "\n";
    return out.str();
}

} // namespace sead::phantom

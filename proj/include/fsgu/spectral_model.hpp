#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fsgu/partition.hpp"

namespace fsgu {

struct ModelConfig {
    int k_max = 8;           // dictionary is {0..k_max-1}^2 before sample-count capping
    int max_iter = 100;
    double gamma = 0.5;      // step damping; compensates the dictionary's non-orthogonality
    double rho = 0.7;        // spatial decay of the sample weighting window
    double rho_f = 0.9;      // spectral decay favoring low frequencies
    double stop_eps = 1e-10; // relative residual-energy floor

    void validate() const {
        if (k_max < 1) throw std::invalid_argument("ModelConfig: k_max must be >= 1");
        if (max_iter < 0) throw std::invalid_argument("ModelConfig: max_iter must be >= 0");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ModelConfig: gamma must be in (0,1]");
        if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("ModelConfig: rho must be in (0,1)");
        if (!(rho_f > 0.0 && rho_f <= 1.0)) throw std::invalid_argument("ModelConfig: rho_f must be in (0,1]");
        if (!(stop_eps >= 0.0)) throw std::invalid_argument("ModelConfig: stop_eps must be >= 0");
    }

    /// Frequencies per axis actually used for n samples; capped so the
    /// dictionary stays smaller than the sample count.
    int effective_k(std::size_t n_samples) const {
        const int cap = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_samples))));
        return std::max(1, std::min(k_max, cap));
    }
};

/// One selected basis function with its accumulated coefficient step.
/// The same (k,l) may appear in several terms; contributions add.
struct ModelTerm {
    int k = 0;
    int l = 0;
    double coeff = 0.0;
};

/// Sparse frequency model of a block surface, evaluable at any continuous
/// (obar, pbar). Terms are kept in selection order.
struct SurfaceModel {
    std::vector<ModelTerm> terms;

    bool empty() const { return terms.empty(); }
};

/// Separable cosine basis function evaluated at continuous arguments.
inline double basis_eval(int k, int l, double obar, double pbar) {
    return std::cos(std::numbers::pi * k * obar) * std::cos(std::numbers::pi * l * pbar);
}

/// Isotropic decaying window centered on the block: rho^distance-to-center.
/// Equals 1 at (0.5, 0.5) and decays radially outward.
inline double spatial_weight(double obar, double pbar, double rho) {
    const double dx = obar - 0.5;
    const double dy = pbar - 0.5;
    return std::pow(rho, std::sqrt(dx * dx + dy * dy));
}

/// Frequency weighting rho_f^|(k,l)|; biases the selection toward low
/// frequencies. rho_f = 1 disables the bias.
inline double spectral_weight(int k, int l, double rho_f) {
    return std::pow(rho_f, std::sqrt(static_cast<double>(k) * k + static_cast<double>(l) * l));
}

inline double eval_model_point(const SurfaceModel& model, double obar, double pbar) {
    double q = 0.0;
    for (const ModelTerm& t : model.terms) {
        q += t.coeff * basis_eval(t.k, t.l, obar, pbar);
    }
    return q;
}

/// Evaluates the model at a list of (obar, pbar) positions. Positions
/// outside [0,1]^2 are still evaluated; their count is reported through
/// out_of_domain when given.
inline std::vector<double> eval_model(const SurfaceModel& model,
                                      const std::vector<std::array<double, 2>>& positions,
                                      std::size_t* out_of_domain = nullptr) {
    std::vector<double> out;
    out.reserve(positions.size());
    std::size_t outside = 0;
    for (const auto& pos : positions) {
        if (pos[0] < 0.0 || pos[0] > 1.0 || pos[1] < 0.0 || pos[1] > 1.0) ++outside;
        out.push_back(eval_model_point(model, pos[0], pos[1]));
    }
    if (out_of_domain) *out_of_domain = outside;
    return out;
}

/// Spatially weighted residual energy of the model against the samples.
inline double residual_energy(const LocalSamples& samples, const SurfaceModel& model, double rho) {
    if (samples.size() == 0) throw std::invalid_argument("residual_energy: empty samples");
    double e = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double r = samples.q[j] - eval_model_point(model, samples.obar[j], samples.pbar[j]);
        e += spatial_weight(samples.obar[j], samples.pbar[j], rho) * r * r;
    }
    return e;
}

enum class FitStatus {
    EnergyFloor,    // selection gain fell below stop_eps * initial energy
    MaxIterations,
    Degenerate,     // every dictionary entry was numerically unusable
};

struct FitResult {
    SurfaceModel model;
    FitStatus status = FitStatus::EnergyFloor;
    int iterations = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    std::vector<double> energy_trace;  // initial energy followed by one entry per iteration
};

/// Fits the frequency model to scattered block samples by iterative basis
/// selection. Each iteration projects the weighted residual onto every
/// dictionary entry, picks the entry with the largest spectrally weighted
/// energy reduction proj^2/norm, and takes a gamma-damped step along it.
/// Exact score ties resolve to the smaller k^2+l^2, then the smaller k.
inline FitResult fit_model(const LocalSamples& samples, const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t n = samples.size();
    if (n == 0) throw std::invalid_argument("fit_model: empty samples");

    const int k_eff = cfg.effective_k(n);
    const std::size_t dict_size = static_cast<std::size_t>(k_eff) * static_cast<std::size_t>(k_eff);

    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = spatial_weight(samples.obar[j], samples.pbar[j], cfg.rho);
    }

    // Basis values and weighted norms are residual-independent; compute once.
    struct DictEntry {
        int k, l, freq_sq;
        double w_f, norm;
        bool usable;
    };
    std::vector<DictEntry> dict(dict_size);
    std::vector<std::vector<double>> phi(dict_size, std::vector<double>(n));
    std::size_t usable_count = 0;
    for (int k = 0; k < k_eff; ++k) {
        for (int l = 0; l < k_eff; ++l) {
            const std::size_t d = static_cast<std::size_t>(k) * k_eff + l;
            double norm = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double v = basis_eval(k, l, samples.obar[j], samples.pbar[j]);
                phi[d][j] = v;
                norm += w[j] * v * v;
            }
            dict[d] = {k, l, k * k + l * l, spectral_weight(k, l, cfg.rho_f), norm, norm >= 1e-12};
            if (dict[d].usable) ++usable_count;
        }
    }

    FitResult result;
    std::vector<double> residual = samples.q;

    double e0 = 0.0;
    for (std::size_t j = 0; j < n; ++j) e0 += w[j] * residual[j] * residual[j];
    result.initial_energy = e0;
    result.final_energy = e0;
    result.energy_trace.push_back(e0);

    if (usable_count == 0) {
        result.status = FitStatus::Degenerate;
        return result;
    }

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        std::size_t best = dict_size;
        double best_score = -1.0;
        double best_proj = 0.0;
        for (std::size_t d = 0; d < dict_size; ++d) {
            if (!dict[d].usable) continue;
            double proj = 0.0;
            for (std::size_t j = 0; j < n; ++j) proj += w[j] * residual[j] * phi[d][j];
            const double score = (proj * proj / dict[d].norm) * dict[d].w_f;
            const bool wins =
                score > best_score ||
                (score == best_score && best < dict_size &&
                 (dict[d].freq_sq < dict[best].freq_sq ||
                  (dict[d].freq_sq == dict[best].freq_sq && dict[d].k < dict[best].k)));
            if (wins) {
                best = d;
                best_score = score;
                best_proj = proj;
            }
        }

        if (best == dict_size || best_score <= cfg.stop_eps * e0) {
            result.status = FitStatus::EnergyFloor;
            return result;
        }

        const double step = cfg.gamma * best_proj / dict[best].norm;
        result.model.terms.push_back({dict[best].k, dict[best].l, step});
        for (std::size_t j = 0; j < n; ++j) residual[j] -= step * phi[best][j];

        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j) e += w[j] * residual[j] * residual[j];
        result.energy_trace.push_back(e);
        result.final_energy = e;
        ++result.iterations;
    }
    result.status = FitStatus::MaxIterations;
    return result;
}

}  // namespace fsgu

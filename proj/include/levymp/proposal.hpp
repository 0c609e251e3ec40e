#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace levymp {

// Density proportional to max(kappa(x), 1)^(-H-gamma) on R^d, where
// kappa(x) = sum |x_j|^alpha_j and H = sum 1/alpha_j.  It has the same
// anisotropic scaling as the integrands, so importance weights stay bounded
// along every direction.
//
// Sampling: x_j = rho^(1/alpha_j) theta_j, with theta on the level set
// kappa = 1 (|theta_j|^alpha_j ~ Dirichlet(1/alpha_1, ..., 1/alpha_d), random
// signs) and rho ~ H rho^(H-1) on [0,1] or gamma rho^(-gamma-1) on [1, inf).
class RadialProposal {
public:
    RadialProposal(std::vector<double> alphas, double gamma) : alphas_(std::move(alphas)), gamma_(gamma) {
        if (alphas_.empty() || alphas_.size() > 3) throw DomainError("proposal needs 1 to 3 alphas");
        if (!(gamma_ > 0.0)) throw DomainError("proposal tail exponent must be positive");
        h_ = 0.0;
        double log_vol = static_cast<double>(alphas_.size()) * std::log(2.0);
        for (double a : alphas_) {
            if (!(a > 0.0)) throw DomainError("proposal alphas must be positive");
            h_ += 1.0 / a;
            log_vol += std::lgamma(1.0 + 1.0 / a);
        }
        log_vol -= std::lgamma(1.0 + h_);
        log_norm_ = -(log_vol + std::log(1.0 + h_ / gamma_));
        core_prob_ = gamma_ / (gamma_ + h_);
    }

    int dim() const { return static_cast<int>(alphas_.size()); }
    double homogeneity() const { return h_; }
    double gamma() const { return gamma_; }

    double kappa(const double* x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < alphas_.size(); ++j) s += std::pow(std::abs(x[j]), alphas_[j]);
        return s;
    }

    double density_from_kappa(double kap) const {
        if (kap <= 1.0) return std::exp(log_norm_);
        return std::exp(log_norm_ - (h_ + gamma_) * std::log(kap));
    }

    double density(const double* x) const { return density_from_kappa(kappa(x)); }

    // fills x[0..d) and returns its density
    double sample(CounterRng& rng, double* x) const {
        const std::size_t d = alphas_.size();
        double g[3];
        double gsum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            g[j] = rng.gamma(1.0 / alphas_[j]);
            gsum += g[j];
        }
        double rho = rng.uniform() < core_prob_ ? std::pow(rng.uniform(), 1.0 / h_)
                                                : std::pow(rng.uniform(), -1.0 / gamma_);
        for (std::size_t j = 0; j < d; ++j) {
            double theta = std::pow(g[j] / gsum, 1.0 / alphas_[j]);
            double sign = (rng() >> 63) ? -1.0 : 1.0;
            x[j] = sign * std::pow(rho, 1.0 / alphas_[j]) * theta;
        }
        return density_from_kappa(rho);
    }

private:
    std::vector<double> alphas_;
    double gamma_;
    double h_ = 0.0;
    double log_norm_ = 0.0;
    double core_prob_ = 0.0;
};

}  // namespace levymp

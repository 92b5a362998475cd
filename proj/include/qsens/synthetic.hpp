#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsens/series.hpp"
#include "qsens/system.hpp"

namespace qsens {

enum class Innovation {
    normal,   // standard normal
    uniform,  // uniform on (-0.5, 0.5)
};

/// F^{-1}(tau) of the innovation distribution.
double innovation_quantile(Innovation innovation, double tau);

/// Location-scale recursion with analytically known conditional quantiles:
///   y[t+1, i] = b_i' z_t + (g_i' z_t) * eps,   z_t = [1, y[t, 1..n]]
/// so the 1-step tau-quantile is z'(b_i + g_i F^{-1}(tau)), linear in z.
/// Multi-horizon quantiles stay linear (and available in closed form) when
/// every scale vector loads on the intercept alone and innovations are
/// normal; see horizon_coefficients.
struct LocationScaleDGP {
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> location;  // b_i, length 1 + n
    std::vector<Eigen::VectorXd> scale;     // g_i, length 1 + n
    Innovation innovation = Innovation::normal;
    int burn_in = 200;

    Eigen::Index n() const { return static_cast<Eigen::Index>(names.size()); }
    Eigen::Index d() const { return n() + 1; }
    bool homoskedastic() const;
};

/// Two-variable homoskedastic normal recursion with cross-variable
/// feedback; stable (spectral radius ~0.73). Closed-form truth at every
/// horizon.
LocationScaleDGP default_dgp();

/// Two-variable heteroskedastic recursion with bounded (uniform)
/// innovations, so scale positivity holds on the whole support. Truth is
/// closed-form at horizon 1 only.
LocationScaleDGP heteroskedastic_dgp();

/// Simulate `length` post-burn-in observations. Deterministic per seed;
/// scale positivity is checked at every step.
AlignedPanel simulate(const LocationScaleDGP& dgp, int length, std::uint64_t seed);

struct HorizonCoefficients {
    std::vector<Eigen::VectorXd> location;
    std::vector<Eigen::VectorXd> scale;
};

/// True (b_{i,h}, g_{i,h}) of the h-step-ahead conditional law. h == 1
/// returns the model as given; h > 1 requires the homoskedastic normal
/// case, where the companion recursion gives linear means and constant
/// accumulated variance.
HorizonCoefficients horizon_coefficients(const LocationScaleDGP& dgp, int horizon);

/// True stacked system (no estimation error): rows b_{i,h} + g_{i,h} F^{-1}(tau).
QuantileSystem analytic_system(const LocationScaleDGP& dgp, const std::vector<double>& taus,
                               int horizon);

/// Ground-truth sensitivity: projection of the analytic system.
double analytic_qs(const LocationScaleDGP& dgp, const std::vector<double>& taus, int horizon,
                   const std::string& response, double tau, const std::string& impulse,
                   double tau_prime);

}  // namespace qsens

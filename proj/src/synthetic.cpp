#include "qsens/synthetic.hpp"

#include <cmath>

#include "qsens/errors.hpp"
#include "qsens/rng.hpp"

namespace qsens {

double innovation_quantile(Innovation innovation, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ConfigError("innovation_quantile: tau must lie in (0,1)");
    }
    switch (innovation) {
        case Innovation::normal:
            return normal_quantile(tau);
        case Innovation::uniform:
            return tau - 0.5;
    }
    throw ConfigError("unknown innovation family");
}

bool LocationScaleDGP::homoskedastic() const {
    for (const Eigen::VectorXd& g : scale) {
        for (Eigen::Index j = 1; j < g.size(); ++j) {
            if (g(j) != 0.0) return false;
        }
    }
    return true;
}

LocationScaleDGP default_dgp() {
    LocationScaleDGP dgp;
    dgp.names = {"y1", "y2"};
    dgp.location = {(Eigen::VectorXd(3) << 0.20, 0.50, 0.20).finished(),
                    (Eigen::VectorXd(3) << 0.10, 0.15, 0.60).finished()};
    dgp.scale = {(Eigen::VectorXd(3) << 1.00, 0.00, 0.00).finished(),
                 (Eigen::VectorXd(3) << 0.80, 0.00, 0.00).finished()};
    dgp.innovation = Innovation::normal;
    return dgp;
}

LocationScaleDGP heteroskedastic_dgp() {
    LocationScaleDGP dgp;
    dgp.names = {"y1", "y2"};
    dgp.location = {(Eigen::VectorXd(3) << 0.30, 0.40, 0.15).finished(),
                    (Eigen::VectorXd(3) << 0.10, 0.10, 0.50).finished()};
    dgp.scale = {(Eigen::VectorXd(3) << 1.00, 0.15, 0.05).finished(),
                 (Eigen::VectorXd(3) << 0.90, 0.00, 0.10).finished()};
    dgp.innovation = Innovation::uniform;
    return dgp;
}

AlignedPanel simulate(const LocationScaleDGP& dgp, int length, std::uint64_t seed) {
    const Eigen::Index n = dgp.n();
    if (n < 1) throw ConfigError("simulate: model has no variables");
    if (length < 1) throw ConfigError("simulate: length must be positive");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (dgp.location[static_cast<std::size_t>(i)].size() != dgp.d() ||
            dgp.scale[static_cast<std::size_t>(i)].size() != dgp.d()) {
            throw ConfigError("simulate: coefficient vectors must have length 1 + n");
        }
    }

    Rng rng(seed);
    const int total = dgp.burn_in + length;
    Eigen::VectorXd z(dgp.d());
    z(0) = 1.0;
    z.tail(n).setZero();

    AlignedPanel panel;
    panel.names = dgp.names;
    panel.impulse = 0;
    panel.values.resize(length, n);
    const YearMonth origin{2000, 1};

    for (int t = 0; t < total; ++t) {
        Eigen::VectorXd next(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double loc = dgp.location[static_cast<std::size_t>(i)].dot(z);
            const double sca = dgp.scale[static_cast<std::size_t>(i)].dot(z);
            if (!(sca > 0.0)) {
                throw DataError("simulate: scale positivity violated for variable '" +
                                dgp.names[static_cast<std::size_t>(i)] + "' at t=" +
                                std::to_string(t));
            }
            const double eps = dgp.innovation == Innovation::normal
                                   ? rng.normal()
                                   : rng.uniform01() - 0.5;
            next(i) = loc + sca * eps;
        }
        z.tail(n) = next;
        const int kept = t - dgp.burn_in;
        if (kept >= 0) {
            panel.values.row(kept) = next.transpose();
            panel.dates.push_back(origin.plus_months(kept));
        }
    }
    return panel;
}

HorizonCoefficients horizon_coefficients(const LocationScaleDGP& dgp, int horizon) {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    const Eigen::Index n = dgp.n();
    HorizonCoefficients out;
    if (horizon == 1) {
        out.location = dgp.location;
        out.scale = dgp.scale;
        return out;
    }
    if (!dgp.homoskedastic() || dgp.innovation != Innovation::normal) {
        throw ConfigError("multi-horizon truth needs intercept-only scales and normal "
                          "innovations; only the 1-step law is available in closed form here");
    }

    // Companion form: z_{t+1} = A z_t + E eps_{t+1}, first coordinate is the
    // constant 1.
    const Eigen::Index d = dgp.d();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    A(0, 0) = 1.0;
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A.row(i + 1) = dgp.location[static_cast<std::size_t>(i)].transpose();
        E(i + 1, i) = dgp.scale[static_cast<std::size_t>(i)](0);
    }

    Eigen::MatrixXd Ah = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(d, d);
    for (int m = 0; m < horizon; ++m) {
        V += Ah * E * E.transpose() * Ah.transpose();
        Ah = A * Ah;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        out.location.push_back(Ah.row(i + 1).transpose());
        Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
        g(0) = std::sqrt(V(i + 1, i + 1));
        out.scale.push_back(g);
    }
    return out;
}

QuantileSystem analytic_system(const LocationScaleDGP& dgp, const std::vector<double>& taus,
                               int horizon) {
    if (taus.empty()) throw ConfigError("analytic_system: empty level grid");
    const HorizonCoefficients one = horizon_coefficients(dgp, 1);
    const HorizonCoefficients hh = horizon_coefficients(dgp, horizon);

    QuantileSystem sys;
    sys.variables = dgp.names;
    sys.taus = taus;
    sys.horizon = horizon;
    const Eigen::Index n = dgp.n();
    const Eigen::Index k = static_cast<Eigen::Index>(taus.size());
    sys.coeffs_one.resize(n * k, dgp.d());
    sys.coeffs_h.resize(n * k, dgp.d());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < k; ++a) {
            const double q = innovation_quantile(dgp.innovation, taus[static_cast<std::size_t>(a)]);
            sys.coeffs_one.row(i * k + a) =
                (one.location[static_cast<std::size_t>(i)] +
                 one.scale[static_cast<std::size_t>(i)] * q)
                    .transpose();
            sys.coeffs_h.row(i * k + a) =
                (hh.location[static_cast<std::size_t>(i)] +
                 hh.scale[static_cast<std::size_t>(i)] * q)
                    .transpose();
        }
    }
    return sys;
}

double analytic_qs(const LocationScaleDGP& dgp, const std::vector<double>& taus, int horizon,
                   const std::string& response, double tau, const std::string& impulse,
                   double tau_prime) {
    const SensitivityMatrix S = projection_matrix(analytic_system(dgp, taus, horizon));
    return quantile_sensitivity(S, response, tau, impulse, tau_prime);
}

}  // namespace qsens

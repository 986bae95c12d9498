#include "sqzkit/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace sqz {
namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Parameters are handled internally as multiples of the initial guess so
// that watts and hertz live on the same scale.
struct Problem {
    std::span<const SqueezingObservation> obs;
    SqueezerParams base;
    FitOptions opt;
    Vec scale;
    double max_pump = 0.0;

    int size() const { return opt.fit_detection_loss ? 3 : 2; }

    SqueezerParams unpack(const Vec& q) const {
        SqueezerParams p = base;
        p.pump_power = 0.0;
        p.threshold_power = q[0] * scale[0];
        p.cavity_half_width = q[1] * scale[1];
        if (opt.fit_detection_loss) p.total_detection_loss = q[2] * scale[2];
        return p;
    }

    bool feasible(const Vec& q) const {
        const SqueezerParams p = unpack(q);
        if (!(p.threshold_power > max_pump) || !(p.cavity_half_width > 0.0)) return false;
        if (opt.fit_detection_loss &&
            !(p.total_detection_loss >= 0.0 && p.total_detection_loss <= opt.max_detection_loss))
            return false;
        return std::isfinite(p.threshold_power) && std::isfinite(p.cavity_half_width);
    }

    // Weighted residuals; also accumulates the unweighted norm if asked.
    Vec residuals(const Vec& q, double* raw_norm = nullptr) const {
        const SqueezerParams p = unpack(q);
        Vec r(static_cast<Eigen::Index>(obs.size()));
        double raw = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const auto& o = obs[i];
            const double m = model_level(p, o, opt.linear_residuals);
            double data = o.level_db;
            double sigma = o.uncertainty_db;
            if (opt.linear_residuals) {
                data = from_db(o.level_db);
                sigma = data * std::log(10.0) / 10.0 * o.uncertainty_db;
            }
            raw += (m - data) * (m - data);
            r[static_cast<Eigen::Index>(i)] = (m - data) / sigma;
        }
        if (raw_norm) *raw_norm = std::sqrt(raw);
        return r;
    }

    Mat jacobian(const Vec& q) const {
        const Eigen::Index m = static_cast<Eigen::Index>(obs.size());
        Mat jac(m, size());
        for (int j = 0; j < size(); ++j) {
            const double h = opt.jacobian_step * std::max(std::abs(q[j]), 1e-3);
            Vec plus = q;
            Vec minus = q;
            plus[j] += h;
            minus[j] -= h;
            const bool fp = feasible(plus);
            const bool fm = feasible(minus);
            if (fp && fm) {
                jac.col(j) = (residuals(plus) - residuals(minus)) / (2.0 * h);
            } else if (fp) {
                jac.col(j) = (residuals(plus) - residuals(q)) / h;
            } else if (fm) {
                jac.col(j) = (residuals(q) - residuals(minus)) / h;
            } else {
                throw NumericalError("fit: no feasible difference step for the Jacobian");
            }
        }
        return jac;
    }
};

void fill_errors(const Problem& pb, const Vec& q, FitResult& res) {
    const Mat jac = pb.jacobian(q);
    const Mat jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Mat> lu(jtj);
    if (!lu.isInvertible()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        res.threshold_power_se = nan;
        res.cavity_half_width_se = nan;
        if (pb.opt.fit_detection_loss) res.total_detection_loss_se = nan;
        return;
    }
    const Mat cov = lu.inverse();
    res.threshold_power_se = std::sqrt(cov(0, 0)) * pb.scale[0];
    res.cavity_half_width_se = std::sqrt(cov(1, 1)) * pb.scale[1];
    if (pb.opt.fit_detection_loss) res.total_detection_loss_se = std::sqrt(cov(2, 2)) * pb.scale[2];
}

FitResult make_result(const Problem& pb, const Vec& q, double cost, int iterations,
                      bool converged) {
    FitResult res;
    const SqueezerParams p = pb.unpack(q);
    res.threshold_power = p.threshold_power;
    res.cavity_half_width = p.cavity_half_width;
    if (pb.opt.fit_detection_loss) res.total_detection_loss = p.total_detection_loss;
    res.objective = cost;
    pb.residuals(q, &res.residual_norm);
    res.iterations = iterations;
    res.converged = converged;
    return res;
}

} // namespace

void SqueezingObservation::validate() const {
    require(pump_power > 0.0, "observation: pump power must be > 0");
    require(frequency > 0.0, "observation: frequency must be > 0");
    require(uncertainty_db > 0.0, "observation: uncertainty must be > 0");
    require(std::isfinite(level_db), "observation: level must be finite");
}

double model_level(const SqueezerParams& model, const SqueezingObservation& obs, bool linear) {
    SqueezerParams p = model;
    p.pump_power = obs.pump_power;
    const double v = variance(p, obs.frequency, obs.branch);
    return linear ? v : to_db(v);
}

double objective(const SqueezerParams& model, std::span<const SqueezingObservation> observations,
                 bool linear) {
    double sum = 0.0;
    for (const auto& o : observations) {
        o.validate();
        const double m = model_level(model, o, linear);
        double data = o.level_db;
        double sigma = o.uncertainty_db;
        if (linear) {
            data = from_db(o.level_db);
            sigma = data * std::log(10.0) / 10.0 * o.uncertainty_db;
        }
        const double r = (m - data) / sigma;
        sum += r * r;
    }
    return sum;
}

FitResult fit_squeezing(std::span<const SqueezingObservation> observations,
                        const SqueezerParams& initial, const FitOptions& options) {
    require(!observations.empty(), "fit: no observations");
    std::set<double> powers;
    std::set<double> freqs;
    double max_pump = 0.0;
    for (const auto& o : observations) {
        o.validate();
        powers.insert(o.pump_power);
        freqs.insert(o.frequency);
        max_pump = std::max(max_pump, o.pump_power);
    }
    require(powers.size() >= 2 && freqs.size() >= 2,
            "fit: need at least two distinct pump powers and two distinct frequencies");
    const int n_params = options.fit_detection_loss ? 3 : 2;
    require(static_cast<int>(observations.size()) > n_params, "fit: fewer observations than parameters");
    require(options.max_iterations > 0, "fit: max_iterations must be > 0");

    Problem pb{observations, initial, options, Vec(n_params), max_pump};
    pb.scale[0] = initial.threshold_power;
    pb.scale[1] = initial.cavity_half_width;
    if (options.fit_detection_loss) {
        // η may start at zero; keep a nonzero scale.
        pb.scale[2] = initial.total_detection_loss > 0.0 ? initial.total_detection_loss : 0.1;
    }
    Vec q = Vec::Ones(n_params);
    if (options.fit_detection_loss) q[2] = initial.total_detection_loss / pb.scale[2];
    require(initial.threshold_power > 0.0 && initial.cavity_half_width > 0.0 && pb.feasible(q),
            "fit: initial guess infeasible (threshold must exceed every pump power)");

    Vec r = pb.residuals(q);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    int iter = 0;
    while (iter < options.max_iterations) {
        ++iter;
        const Mat jac = pb.jacobian(q);
        const Mat jtj = jac.transpose() * jac;
        const Vec grad = jac.transpose() * r;
        Mat damped = jtj;
        for (int j = 0; j < n_params; ++j) damped(j, j) += lambda * std::max(jtj(j, j), 1e-30);
        const Vec step = damped.ldlt().solve(-grad);
        const Vec trial = q + step;
        if (!step.allFinite() || !pb.feasible(trial)) {
            lambda *= 10.0;
            if (lambda > 1e20) break;
            continue;
        }
        const Vec r_trial = pb.residuals(trial);
        const double cost_trial = r_trial.squaredNorm();
        if (cost_trial <= cost) {
            const double rel_step = (step.array().abs() / trial.array().abs().max(1e-12)).maxCoeff();
            const double rel_cost = (cost - cost_trial) / std::max(cost, 1e-300);
            q = trial;
            r = r_trial;
            cost = cost_trial;
            lambda = std::max(lambda / 10.0, 1e-12);
            if (rel_step < options.parameter_tolerance || rel_cost < options.objective_tolerance) {
                FitResult res = make_result(pb, q, cost, iter, true);
                fill_errors(pb, q, res);
                return res;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e20) break;
        }
    }
    // Damping blew up: no downhill step exists at machine precision, which
    // is a converged point. Only the iteration limit is a failure.
    FitResult res = make_result(pb, q, cost, iter, iter < options.max_iterations);
    fill_errors(pb, q, res);
    if (!res.converged) throw FitError("fit: iteration limit reached", res);
    return res;
}

std::vector<SqueezingObservation> synth_dataset(const SqueezerParams& model,
                                                std::span<const double> pump_powers,
                                                std::span<const double> frequencies,
                                                double noise_sigma_db, std::uint64_t seed) {
    require(noise_sigma_db >= 0.0, "synth: noise sigma must be >= 0");
    for (double p : pump_powers) {
        require(p > 0.0 && p < model.threshold_power, "synth: pump powers must lie in (0, P_th)");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = noise_sigma_db > 0.0 ? noise_sigma_db : 0.1;
    std::vector<SqueezingObservation> out;
    out.reserve(pump_powers.size() * frequencies.size() * 2);
    for (double p : pump_powers) {
        for (double f : frequencies) {
            for (Branch b : {Branch::squeezed, Branch::anti}) {
                SqueezingObservation o{p, f, b, 0.0, sigma};
                o.level_db = model_level(model, o);
                if (noise_sigma_db > 0.0) o.level_db += noise_sigma_db * noise(rng);
                out.push_back(o);
            }
        }
    }
    return out;
}

std::vector<double> log_space(double lo, double hi, int n) {
    require(lo > 0.0 && hi >= lo && n >= 1, "log_space: need 0 < lo <= hi and n >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace sqz

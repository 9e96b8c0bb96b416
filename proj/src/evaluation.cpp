#include "bucmrl/evaluation.hpp"

#include <cmath>

namespace bucmrl {

int TrajectoryLog::horizon() const {
    return phis.empty() ? 0 : static_cast<int>(phis.front().size());
}

long TrajectoryLog::total_steps() const {
    long total = 0;
    for (const auto& ep : phis) total += static_cast<long>(ep.size());
    return total;
}

TrajectoryLog trajectory_log(const RunRecord& record, const LinearMdp& mdp) {
    TrajectoryLog log;
    log.lambda = record.lambda;
    log.phis.reserve(record.states.size());
    for (std::size_t n = 0; n < record.states.size(); ++n) {
        std::vector<Vector> ep;
        ep.reserve(record.states[n].size());
        for (std::size_t h = 0; h < record.states[n].size(); ++h)
            ep.push_back(mdp.features().phi_row(record.states[n][h], record.actions[n][h]));
        log.phis.push_back(std::move(ep));
    }
    return log;
}

BoundReport regret_bound(const RegularityConstants& constants, double lambda, long t_steps,
                         int horizon, int d, int d_prime, double w_distance,
                         double empirical_regret) {
    BoundReport report;
    report.empirical_regret = empirical_regret;
    report.big_d = 1.0 + static_cast<double>(t_steps) * constants.c_phi /
                             (lambda * static_cast<double>(d));
    report.c_phi_lambda = 4.0 + constants.c_phi / lambda;
    report.beta_term = constants.c_psi_prime *
                           std::sqrt(static_cast<double>(d_prime) * d *
                                     std::log(static_cast<double>(t_steps) * report.big_d)) +
                       std::sqrt(lambda) * w_distance;
    report.sweep_term = 2.0 * constants.c_psi * horizon *
                        std::sqrt(report.c_phi_lambda * static_cast<double>(t_steps) * d *
                                  std::log(report.big_d));
    report.bound = report.beta_term * report.sweep_term;
    report.slack_ratio = report.bound / std::max(empirical_regret, 1e-12);
    return report;
}

MtrBound mtr_bound(const RegularityConstants& constants, double lambda, long t_steps, int horizon,
                   int d, int d_prime, double var_w, double mad_w) {
    MtrBound out;
    const double t = static_cast<double>(t_steps);
    const double big_d = 1.0 + t * constants.c_phi / (lambda * d);
    const double c_phi_lambda = 4.0 + constants.c_phi / lambda;
    const double head = constants.c_psi * horizon * constants.c_psi_prime * d *
                        std::sqrt(d_prime * t * c_phi_lambda * std::log(t * big_d) *
                                  std::log(big_d));
    const double tail_common =
        constants.c_psi * horizon * std::sqrt(lambda * t * c_phi_lambda * d * std::log(big_d));
    out.mad_form = head + mad_w * tail_common;
    out.var_form = head + std::sqrt(var_w) * tail_common;
    out.tighter = std::min(out.mad_form, out.var_form);

    // lambda = 1/(T Var_W) schedule.
    const double dvar = 1.0 + t * t * var_w * constants.c_phi / d;
    const double lambda_sched = 1.0 / (t * std::max(var_w, 1e-6));
    const double c_phi_lambda_sched = 4.0 + constants.c_phi / lambda_sched;
    out.dvar_form = (1.0 + constants.c_psi_prime *
                               std::sqrt(d_prime * d * t * std::log(t * dvar))) *
                    constants.c_psi * horizon * std::sqrt(c_phi_lambda_sched * d * std::log(dvar));
    return out;
}

namespace {

double mahalanobis(const Vector& phi, const Matrix& m_inv) {
    return std::sqrt(std::max(0.0, phi.dot(m_inv * phi)));
}

}  // namespace

LemmaCheck check_log_det_lemma(const TrajectoryLog& log, double c_phi) {
    if (log.phis.empty()) throw IncompleteLog("empty trajectory log");
    const int d = static_cast<int>(log.phis.front().front().size());
    const double lambda = log.lambda;
    const long t_total = log.total_steps();

    Matrix v_episode = lambda * Matrix::Identity(d, d);  // V_n^lambda frozen per episode
    Matrix v_step = lambda * Matrix::Identity(d, d);     // V_{n,h}^lambda per step
    double lhs = 0.0;
    double rhs_sum = 0.0;
    for (const auto& ep : log.phis) {
        const Matrix v_episode_inv = v_episode.ldlt().solve(Matrix::Identity(d, d));
        for (const auto& phi : ep) {
            lhs += mahalanobis(phi, v_episode_inv);
            const Matrix v_step_inv = v_step.ldlt().solve(Matrix::Identity(d, d));
            rhs_sum += 2.0 * mahalanobis(phi, v_step_inv);
            v_step += phi * phi.transpose();
        }
        v_episode = v_step;
    }
    const double big_d = 1.0 + static_cast<double>(t_total) * c_phi / (lambda * d);
    LemmaCheck check;
    check.lemma_id = "log_det";
    check.lhs = lhs;
    check.rhs = rhs_sum + (c_phi / lambda) * d * std::log(big_d);
    check.holds = check.lhs <= check.rhs + 1e-9;
    return check;
}

LemmaCheck check_elliptical_potential(const TrajectoryLog& log, double c_phi) {
    if (log.phis.empty()) throw IncompleteLog("empty trajectory log");
    const int d = static_cast<int>(log.phis.front().front().size());
    const double lambda = log.lambda;
    Matrix v = lambda * Matrix::Identity(d, d);
    double lhs = 0.0;
    long t_total = 0;
    for (const auto& ep : log.phis) {
        for (const auto& phi : ep) {
            const Matrix v_inv = v.ldlt().solve(Matrix::Identity(d, d));
            const double w = phi.dot(v_inv * phi);
            lhs += std::min(1.0, w);
            v += phi * phi.transpose();
            ++t_total;
        }
    }
    LemmaCheck check;
    check.lemma_id = "elliptical_potential";
    check.lhs = lhs;
    check.rhs = 2.0 * d * std::log(1.0 + static_cast<double>(t_total) * c_phi / (lambda * d));
    check.holds = check.lhs <= check.rhs + 1e-9;
    return check;
}

LemmaCheck check_stale_feature_lemma(const TrajectoryLog& log, double c_phi) {
    if (log.phis.empty()) throw IncompleteLog("empty trajectory log");
    const int d = static_cast<int>(log.phis.front().front().size());
    const int h_len = log.horizon();
    const double lambda = log.lambda;
    Matrix v = lambda * Matrix::Identity(d, d);
    double lhs = 0.0;
    long t_total = 0;
    for (const auto& ep : log.phis) {
        const Matrix v_inv = v.ldlt().solve(Matrix::Identity(d, d));
        for (const auto& phi : ep) {
            const double w = phi.dot(v_inv * phi);
            lhs += std::min(1.0, w);
            ++t_total;
        }
        for (const auto& phi : ep) v += phi * phi.transpose();
    }
    LemmaCheck check;
    check.lemma_id = "stale_features";
    check.lhs = lhs;
    check.rhs = 2.0 * h_len * d *
                std::log(1.0 + static_cast<double>(t_total) * c_phi / (lambda * d));
    check.holds = check.lhs <= check.rhs + 1e-9;
    return check;
}

TransferRegretSummary transfer_regret(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("need at least one record");
    TransferRegretSummary out;
    out.count = static_cast<int>(records.size());
    double sum = 0.0;
    for (const auto& r : records) sum += r.cumulative_regret;
    out.mean = sum / out.count;
    if (out.count > 1) {
        double ss = 0.0;
        for (const auto& r : records) {
            const double dev = r.cumulative_regret - out.mean;
            ss += dev * dev;
        }
        out.stderr_ = std::sqrt(ss / (out.count - 1.0) / out.count);
    }
    return out;
}

}  // namespace bucmrl

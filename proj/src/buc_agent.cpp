#include "bucmrl/buc_agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bucmrl {

OptimisticPlan build_optimistic_q(const Matrix& m_hat, double beta, const Matrix& v_lambda_inv,
                                  const Features& features, const std::vector<double>& reward,
                                  int horizon, double c_psi) {
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    const int S = features.num_states();
    const int A = features.num_actions();
    const double h_cap = static_cast<double>(horizon);

    OptimisticPlan plan;
    plan.bonus_scale = beta;
    plan.q.assign(horizon, Matrix::Zero(S, A));
    plan.clipped.assign(horizon, Matrix::Zero(S, A));
    plan.v.assign(horizon + 1, Vector::Zero(S));

    // phi^T M_hat Psi^T gives the estimated next-state weights per (s,a) row;
    // the exploration width ||phi||_{(V^lambda)^{-1}} is data-independent of h.
    const Matrix p_hat = features.phi() * m_hat * features.psi().transpose();
    Vector widths(S * A);
    for (int i = 0; i < S * A; ++i) {
        const Vector phi = features.phi().row(i).transpose();
        widths[i] = std::sqrt(phi.dot(v_lambda_inv * phi));
    }

    for (int h = horizon - 1; h >= 0; --h) {
        const Vector& v_next = plan.v[h + 1];
        const double v_next_inf = horizon - 1 == h ? 0.0 : v_next.cwiseAbs().maxCoeff();
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const int i = s * A + a;
                const double bonus = beta * widths[i] * c_psi * v_next_inf;
                const double raw = reward[i] + p_hat.row(i).dot(v_next) + bonus;
                const double clipped = std::clamp(raw, 0.0, h_cap);
                plan.q[h](s, a) = clipped;
                if (clipped != raw) plan.clipped[h](s, a) = 1.0;
            }
            plan.v[h][s] = plan.q[h].row(s).maxCoeff();
        }
    }
    return plan;
}

int greedy_action(const OptimisticPlan& plan, int s, int h) {
    const auto& row = plan.q[h].row(s);
    int best = 0;
    for (int a = 1; a < row.size(); ++a)
        if (row[a] > row[best]) best = a;
    return best;
}

double RunRecord::recompute_regret(const LinearMdp& mdp) const {
    double total = 0.0;
    for (std::size_t n = 0; n < states.size(); ++n) {
        double ret = 0.0;
        for (std::size_t h = 0; h < states[n].size(); ++h)
            ret += mdp.reward(states[n][h], actions[n][h]);
        total += v_star_start - ret;
    }
    return total;
}

RunRecord run_task(const LinearMdp& mdp, BiasSource& bias, const TaskOptions& opts, Rng& rng) {
    if (opts.episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    const int H = mdp.horizon();
    const double delta =
        opts.delta > 0.0 ? opts.delta : 1.0 / (static_cast<double>(opts.episodes) * H);
    const auto constants = compute_regularity_constants(mdp.features(), mdp.core());
    const Vector v_star = mdp.optimal_values()[0];

    RidgeState ridge(mdp.features().d(), mdp.features().d_prime(), opts.lambda,
                     mdp.features().kpsi_inv(), bias.current_w());

    RunRecord record;
    record.lambda = opts.lambda;
    record.v_star_start = v_star[mdp.start_state()];

    for (int n = 0; n < opts.episodes; ++n) {
        ridge.set_bias_w(bias.current_w());
        const Matrix m_hat = ridge.solve();
        double w_distance = 0.0;
        switch (opts.w_distance_mode) {
            case WDistanceMode::Oracle:
                w_distance = (ridge.bias_w() - mdp.core().m).norm();
                break;
            case WDistanceMode::AssumptionBound:
                w_distance = assumption_w_distance(ridge.bias_w(), constants);
                break;
            case WDistanceMode::Explicit:
                w_distance = opts.w_distance_value;
                break;
        }
        const double beta = ellipsoid_radius(ridge, delta, constants, w_distance);
        const OptimisticPlan plan =
            build_optimistic_q(m_hat, beta, ridge.v_lambda_inv(), mdp.features(),
                               mdp.reward_table(), H, constants.c_psi);

        EpisodeStats stats;
        stats.episode = n;
        stats.v_star = record.v_star_start;
        stats.beta = beta;
        stats.core_error = (m_hat - mdp.core().m).norm();
        stats.in_ellipsoid = stats.core_error <= beta;
        stats.lambda_min = ridge.lambda_min_v_lambda();
        stats.v_plan_start = plan.v[0][mdp.start_state()];

        std::vector<int> ep_states, ep_actions, ep_next;
        int s = mdp.start_state();
        for (int h = 0; h < H; ++h) {
            const int a = greedy_action(plan, s, h);
            const int s_next = mdp.sample_next_state(s, a, rng);
            stats.realized_return += mdp.reward(s, a);
            ep_states.push_back(s);
            ep_actions.push_back(a);
            ep_next.push_back(s_next);
            s = s_next;
        }
        for (int h = 0; h < H; ++h) {
            const Vector phi = mdp.features().phi_row(ep_states[h], ep_actions[h]);
            const Vector psi_next = mdp.features().psi_row(ep_next[h]);
            ridge.update(phi, psi_next);
            bias.on_transition(phi, psi_next);
        }
        bias.on_episode_end(ridge);

        stats.regret_increment = stats.v_star - stats.realized_return;
        record.cumulative_regret += stats.regret_increment;
        stats.cum_regret = record.cumulative_regret;
        record.episodes.push_back(stats);
        record.states.push_back(std::move(ep_states));
        record.actions.push_back(std::move(ep_actions));
        record.next_states.push_back(std::move(ep_next));
    }
    return record;
}

RunRecord run_task(const LinearMdp& mdp, const Matrix& bias_w, const TaskOptions& opts, Rng& rng) {
    FixedBias bias(bias_w);
    return run_task(mdp, bias, opts, rng);
}

void write_run_csv(const RunRecord& record, std::ostream& out) {
    out << "episode,return,v_star,regret_increment,cum_regret,beta,in_ellipsoid,core_error,"
           "lambda_min\n";
    char buf[512];
    for (const auto& e : record.episodes) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", e.episode,
                      e.realized_return, e.v_star, e.regret_increment, e.cum_regret, e.beta,
                      e.in_ellipsoid ? 1 : 0, e.core_error, e.lambda_min);
        out << buf;
    }
}

}  // namespace bucmrl

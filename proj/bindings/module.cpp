#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bucmrl/evaluation.hpp"
#include "bucmrl/experiment.hpp"

namespace py = pybind11;
using namespace bucmrl;

PYBIND11_MODULE(_bucmrl, m) {
    m.doc() = "biased upper-confidence matrix RL on linear-transition MDPs";
    m.attr("__version__") = kArtifactVersion;

    py::register_exception<InvalidModel>(m, "InvalidModel");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>());
    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("a"), py::arg("b") = 0,
          py::arg("c") = 0);

    py::class_<TransitionCore>(m, "TransitionCore")
        .def(py::init<Matrix>())
        .def_readwrite("m", &TransitionCore::m)
        .def_property_readonly("d", &TransitionCore::d)
        .def_property_readonly("d_prime", &TransitionCore::d_prime);

    py::class_<Features>(m, "Features")
        .def(py::init<Matrix, Matrix, int, int>(), py::arg("phi"), py::arg("psi"),
             py::arg("num_states"), py::arg("num_actions"))
        .def_property_readonly("phi", &Features::phi)
        .def_property_readonly("psi", &Features::psi)
        .def_property_readonly("d", &Features::d)
        .def_property_readonly("d_prime", &Features::d_prime)
        .def("phi_row", &Features::phi_row)
        .def_property_readonly("kpsi_inv", &Features::kpsi_inv);

    py::class_<RegularityConstants>(m, "RegularityConstants")
        .def_readonly("c_phi", &RegularityConstants::c_phi)
        .def_readonly("c_psi", &RegularityConstants::c_psi)
        .def_readonly("c_psi_prime", &RegularityConstants::c_psi_prime)
        .def_readonly("c_m", &RegularityConstants::c_m);
    m.def("compute_regularity_constants", &compute_regularity_constants);

    py::class_<LinearMdp>(m, "LinearMdp")
        .def(py::init<Features, TransitionCore, std::vector<double>, int, int>(),
             py::arg("features"), py::arg("core"), py::arg("reward"), py::arg("horizon"),
             py::arg("start_state"))
        .def_property_readonly("horizon", &LinearMdp::horizon)
        .def("transition_distribution", &LinearMdp::transition_distribution)
        .def("transition_matrix", &LinearMdp::transition_matrix)
        .def("optimal_values", &LinearMdp::optimal_values)
        .def("to_json", &LinearMdp::to_json)
        .def_static("from_json", &LinearMdp::from_json);

    py::class_<TaskFamily>(m, "TaskFamily")
        .def_static("anchor_dirichlet", &TaskFamily::anchor_dirichlet)
        .def_static("finite_set", &TaskFamily::finite_set)
        .def("mean_core", &TaskFamily::mean_core)
        .def("sample_core", &TaskFamily::sample_core)
        .def("make_mdp", &TaskFamily::make_mdp);
    m.def("orthogonal_family", &orthogonal_family);

    py::class_<RidgeState>(m, "RidgeState")
        .def(py::init<int, int, double, Matrix, Matrix>(), py::arg("d"), py::arg("d_prime"),
             py::arg("lambda_"), py::arg("kpsi_inv"), py::arg("bias_w"))
        .def(py::init<int, int, double, Matrix>(), py::arg("d"), py::arg("d_prime"),
             py::arg("lambda_"), py::arg("kpsi_inv"))
        .def_property_readonly("t", &RidgeState::t)
        .def("set_bias_w", &RidgeState::set_bias_w)
        .def("update", &RidgeState::update)
        .def("solve", &RidgeState::solve)
        .def("v_lambda", &RidgeState::v_lambda)
        .def("lambda_min_v_lambda", &RidgeState::lambda_min_v_lambda)
        .def("to_json", &RidgeState::to_json)
        .def_static("from_json", &RidgeState::from_json);
    m.def("ellipsoid_radius", &ellipsoid_radius);
    m.def("assumption_w_distance", &assumption_w_distance);

    py::enum_<WDistanceMode>(m, "WDistanceMode")
        .value("Oracle", WDistanceMode::Oracle)
        .value("AssumptionBound", WDistanceMode::AssumptionBound)
        .value("Explicit", WDistanceMode::Explicit);

    py::class_<TaskOptions>(m, "TaskOptions")
        .def(py::init<>())
        .def_readwrite("lambda_", &TaskOptions::lambda)
        .def_readwrite("episodes", &TaskOptions::episodes)
        .def_readwrite("delta", &TaskOptions::delta)
        .def_readwrite("w_distance_mode", &TaskOptions::w_distance_mode)
        .def_readwrite("w_distance_value", &TaskOptions::w_distance_value);

    py::class_<EpisodeStats>(m, "EpisodeStats")
        .def_readonly("episode", &EpisodeStats::episode)
        .def_readonly("realized_return", &EpisodeStats::realized_return)
        .def_readonly("regret_increment", &EpisodeStats::regret_increment)
        .def_readonly("cum_regret", &EpisodeStats::cum_regret)
        .def_readonly("beta", &EpisodeStats::beta)
        .def_readonly("in_ellipsoid", &EpisodeStats::in_ellipsoid)
        .def_readonly("core_error", &EpisodeStats::core_error);

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("episodes", &RunRecord::episodes)
        .def_readonly("cumulative_regret", &RunRecord::cumulative_regret)
        .def_readonly("lambda_", &RunRecord::lambda)
        .def("recompute_regret", &RunRecord::recompute_regret);

    m.def(
        "run_task",
        [](const LinearMdp& mdp, const Matrix& bias_w, const TaskOptions& opts, Rng& rng) {
            return run_task(mdp, bias_w, opts, rng);
        },
        py::arg("mdp"), py::arg("bias_w"), py::arg("opts"), py::arg("rng"));

    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("Zero", EstimatorKind::Zero)
        .value("Oracle", EstimatorKind::Oracle)
        .value("LowBiasAverage", EstimatorKind::LowBiasAverage)
        .value("GlobalRidge", EstimatorKind::GlobalRidge);

    py::class_<MetaOptions>(m, "MetaOptions")
        .def(py::init<>())
        .def_readwrite("g_train", &MetaOptions::g_train)
        .def_readwrite("g_test", &MetaOptions::g_test)
        .def_readwrite("episodes", &MetaOptions::episodes)
        .def_readwrite("delta", &MetaOptions::delta)
        .def_readwrite("lambda_", &MetaOptions::lambda)
        .def_readwrite("use_lambda_schedule", &MetaOptions::use_lambda_schedule)
        .def_readwrite("continual", &MetaOptions::continual);

    py::class_<MetaRunRecord>(m, "MetaRunRecord")
        .def_readonly("train_records", &MetaRunRecord::train_records)
        .def_readonly("test_records", &MetaRunRecord::test_records)
        .def_readonly("final_w", &MetaRunRecord::final_w)
        .def_readonly("var_estimate", &MetaRunRecord::var_estimate)
        .def_readonly("transfer_regret", &MetaRunRecord::transfer_regret)
        .def_readonly("transfer_regret_stderr", &MetaRunRecord::transfer_regret_stderr);
    m.def("meta_train", &meta_train);
    m.def("low_bias_w", &low_bias_w);
    m.def("lambda_schedule", &lambda_schedule);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("empirical_regret", &BoundReport::empirical_regret)
        .def_readonly("bound", &BoundReport::bound)
        .def_readonly("slack_ratio", &BoundReport::slack_ratio);
    m.def("regret_bound", &regret_bound, py::arg("constants"), py::arg("lambda_"),
          py::arg("t_steps"), py::arg("horizon"), py::arg("d"), py::arg("d_prime"),
          py::arg("w_distance"), py::arg("empirical_regret") = 0.0);

    py::class_<TrajectoryLog>(m, "TrajectoryLog")
        .def_readonly("lambda_", &TrajectoryLog::lambda)
        .def("total_steps", &TrajectoryLog::total_steps);
    m.def("trajectory_log", &trajectory_log);

    py::class_<LemmaCheck>(m, "LemmaCheck")
        .def_readonly("lemma_id", &LemmaCheck::lemma_id)
        .def_readonly("lhs", &LemmaCheck::lhs)
        .def_readonly("rhs", &LemmaCheck::rhs)
        .def_readonly("holds", &LemmaCheck::holds);
    m.def("check_log_det_lemma", &check_log_det_lemma);
    m.def("check_elliptical_potential", &check_elliptical_potential);
    m.def("check_stale_feature_lemma", &check_stale_feature_lemma);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("episodes", &ExperimentConfig::episodes)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def("validate", &ExperimentConfig::validate)
        .def("to_text", &ExperimentConfig::to_text)
        .def_static("parse_text", &ExperimentConfig::parse_text)
        .def_static("load", &ExperimentConfig::load);
    m.def("build_family", &build_family);
    m.def("run_scenario", &run_scenario, py::arg("config"), py::arg("workers") = 1);
}

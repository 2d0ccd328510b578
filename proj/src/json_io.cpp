#include "fidmet/json_io.hpp"

#include <fstream>

namespace fidmet {

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw ValidationError("matrix JSON has the wrong number of rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError("matrix JSON has the wrong number of columns");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& entry = row[static_cast<std::size_t>(c)];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number()) {
                throw ValidationError("matrix entries must be [re, im] number pairs");
            }
            m(i, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    return m;
}

Eigen::Index dim_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long>() < 1) {
        throw ValidationError(std::string("missing or invalid \"") + key + "\" field");
    }
    return j[key].get<Eigen::Index>();
}

} // namespace

json state_to_json(const DensityMatrix& rho) {
    return json{{"dim", rho.dim()}, {"matrix", matrix_to_json(rho.matrix())}};
}

DensityMatrix state_from_json(const json& j) {
    const Eigen::Index d = dim_field(j, "dim");
    if (!j.contains("matrix")) throw ValidationError("state JSON is missing \"matrix\"");
    return DensityMatrix::validated(matrix_from_json(j["matrix"], d, d));
}

json pure_to_json(const PureState& psi) {
    json amps = json::array();
    for (Eigen::Index i = 0; i < psi.dim(); ++i) {
        amps.push_back(json::array({psi.amplitudes()[i].real(), psi.amplitudes()[i].imag()}));
    }
    return json{{"dim", psi.dim()}, {"amplitudes", std::move(amps)}};
}

PureState pure_from_json(const json& j) {
    const Eigen::Index d = dim_field(j, "dim");
    if (!j.contains("amplitudes") || !j["amplitudes"].is_array() ||
        static_cast<Eigen::Index>(j["amplitudes"].size()) != d) {
        throw ValidationError("pure state JSON needs an \"amplitudes\" array of length dim");
    }
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const json& entry = j["amplitudes"][static_cast<std::size_t>(i)];
        if (!entry.is_array() || entry.size() != 2) {
            throw ValidationError("amplitudes must be [re, im] number pairs");
        }
        v[i] = Complex(entry[0].get<double>(), entry[1].get<double>());
    }
    return PureState::validated(std::move(v));
}

json channel_to_json(const KrausChannel& phi) {
    json ops = json::array();
    for (const auto& k : phi.kraus()) ops.push_back(matrix_to_json(k));
    return json{{"dim_in", phi.dim_in()}, {"dim_out", phi.dim_out()}, {"kraus", std::move(ops)}};
}

KrausChannel channel_from_json(const json& j) {
    const Eigen::Index din = dim_field(j, "dim_in");
    const Eigen::Index dout = dim_field(j, "dim_out");
    if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty()) {
        throw ValidationError("channel JSON needs a nonempty \"kraus\" array");
    }
    std::vector<Matrix> ops;
    ops.reserve(j["kraus"].size());
    for (const auto& op : j["kraus"]) ops.push_back(matrix_from_json(op, dout, din));
    return KrausChannel::validated(std::move(ops));
}

namespace {

json optimizer_to_json(const OptimizerConfig& cfg) {
    return json{{"restarts", cfg.restarts},
                {"max_iterations", cfg.max_iterations},
                {"step_tolerance", cfg.step_tolerance},
                {"value_tolerance", cfg.value_tolerance},
                {"seed", cfg.seed}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    OptimizerConfig cfg;
    if (j.contains("restarts")) cfg.restarts = j["restarts"].get<int>();
    if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
    if (j.contains("step_tolerance")) cfg.step_tolerance = j["step_tolerance"].get<double>();
    if (j.contains("value_tolerance")) cfg.value_tolerance = j["value_tolerance"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

} // namespace

json spec_to_json(const ExperimentSpec& spec) {
    return json{{"experiment", experiment_name(spec.experiment)},
                {"metric", metric_name(spec.metric)},
                {"dims", spec.dims},
                {"trials", spec.trials},
                {"seed", spec.seed},
                {"env_dims", spec.env_dims},
                {"optimizer", optimizer_to_json(spec.optimizer)},
                {"tmetric_mode", spec.tmetric_mode == TMetricMode::Numeric ? "numeric" : "auto"}};
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    const auto exp = parse_experiment(j.value("experiment", ""));
    if (!exp) throw ValidationError("unknown experiment name in spec JSON");
    spec.experiment = *exp;
    const auto metric = parse_metric(j.value("metric", "tmetric"));
    if (!metric) throw ValidationError("unknown metric name in spec JSON");
    spec.metric = *metric;
    if (j.contains("dims")) spec.dims = j["dims"].get<std::vector<int>>();
    if (j.contains("trials")) spec.trials = j["trials"].get<long>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("env_dims")) spec.env_dims = j["env_dims"].get<std::vector<int>>();
    if (j.contains("optimizer")) spec.optimizer = optimizer_from_json(j["optimizer"]);
    if (j.value("tmetric_mode", "auto") == std::string("numeric")) {
        spec.tmetric_mode = TMetricMode::Numeric;
    }
    return spec;
}

namespace {

json witness_to_json(const Witness& w) {
    json states = json::array();
    for (const auto& s : w.states) {
        states.push_back(json{{"dim", s.rows()}, {"matrix", matrix_to_json(s)}});
    }
    json out{{"trial_index", w.trial_index},
             {"dim", w.dim},
             {"check", w.check},
             {"states", std::move(states)},
             {"eval_seeds", w.eval_seeds}};
    out["lambda"] = w.lambda >= 0.0 ? json(w.lambda) : json(nullptr);
    out["channel"] = w.channel ? channel_to_json(*w.channel) : json(nullptr);
    return out;
}

Witness witness_from_json(const json& j) {
    Witness w;
    w.trial_index = j.value("trial_index", 0L);
    w.dim = j.value("dim", 0);
    w.check = j.value("check", "");
    if (j.contains("lambda") && !j["lambda"].is_null()) w.lambda = j["lambda"].get<double>();
    if (j.contains("states")) {
        for (const auto& s : j["states"]) {
            const Eigen::Index d = dim_field(s, "dim");
            w.states.push_back(matrix_from_json(s["matrix"], d, d));
        }
    }
    if (j.contains("channel") && !j["channel"].is_null()) {
        w.channel = channel_from_json(j["channel"]);
    }
    if (j.contains("eval_seeds")) {
        w.eval_seeds = j["eval_seeds"].get<std::vector<std::uint64_t>>();
    }
    return w;
}

} // namespace

json report_to_json(const ExperimentReport& report) {
    json out{{"spec", spec_to_json(report.spec)},
             {"trials_run", report.trials_run},
             {"violations", report.violations},
             {"max_violation", report.max_violation},
             {"non_converged", report.non_converged},
             {"wall_time_s", report.wall_time_s}};
    out["witness"] = report.witness ? witness_to_json(*report.witness) : json(nullptr);
    if (!report.gap_stats.empty()) {
        json gaps = json::object();
        for (const auto& [dim, gs] : report.gap_stats) {
            gaps[std::to_string(dim)] =
                json{{"min", gs.min}, {"mean", gs.mean}, {"max", gs.max}, {"count", gs.count}};
        }
        out["gap_stats"] = std::move(gaps);
    }
    if (!report.argmax_rank_counts.empty()) {
        json ranks = json::object();
        for (const auto& [rank, count] : report.argmax_rank_counts) {
            ranks[std::to_string(rank)] = count;
        }
        out["argmax_rank_counts"] = std::move(ranks);
    }
    return out;
}

ExperimentReport report_from_json(const json& j) {
    ExperimentReport report;
    report.spec = spec_from_json(j.at("spec"));
    report.trials_run = j.value("trials_run", 0L);
    report.violations = j.value("violations", 0L);
    report.max_violation = j.value("max_violation", 0.0);
    report.non_converged = j.value("non_converged", 0L);
    report.wall_time_s = j.value("wall_time_s", 0.0);
    if (j.contains("witness") && !j["witness"].is_null()) {
        report.witness = witness_from_json(j["witness"]);
    }
    if (j.contains("gap_stats")) {
        for (const auto& [key, gs] : j["gap_stats"].items()) {
            report.gap_stats[std::stoi(key)] = GapStats{gs.value("min", 0.0), gs.value("mean", 0.0),
                                                        gs.value("max", 0.0), gs.value("count", 0L)};
        }
    }
    if (j.contains("argmax_rank_counts")) {
        for (const auto& [key, count] : j["argmax_rank_counts"].items()) {
            report.argmax_rank_counts[std::stoi(key)] = count.get<long>();
        }
    }
    return report;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void save_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

DensityMatrix load_state(const std::string& path) { return state_from_json(load_json_file(path)); }

} // namespace fidmet

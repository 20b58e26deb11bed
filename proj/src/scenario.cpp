#include "sgsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "sgsim/errors.hpp"
#include "sgsim/noise_spectral.hpp"
#include "sgsim/ode_oracle.hpp"
#include "sgsim/stochastic.hpp"
#include "sgsim/trajectory.hpp"
#include "sgsim/wavepacket.hpp"

namespace sgsim {

using nlohmann::json;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Analysis, std::string_view> kAnalysisNames[] = {
    {Analysis::Trajectory, "trajectory"},   {Analysis::Transfer, "transfer"},
    {Analysis::Dephasing, "dephasing"},     {Analysis::Bounds, "bounds"},
    {Analysis::MonteCarlo, "mc"},           {Analysis::Wavepacket, "wavepacket"},
    {Analysis::Feasibility, "feasibility"}, {Analysis::Baseline, "baseline"},
    {Analysis::ModelCompare, "model-compare"},
};

} // namespace

std::string_view to_string(Analysis a)
{
    for (const auto& [k, v] : kAnalysisNames)
        if (k == a)
            return v;
    return "?";
}

Analysis analysis_from_string(std::string_view s)
{
    for (const auto& [k, v] : kAnalysisNames)
        if (v == s)
            return k;
    throw ConfigError("analyses: unknown analysis \"" + std::string(s) + "\"");
}

OutputFormat format_from_string(std::string_view s)
{
    if (s == "csv")
        return OutputFormat::Csv;
    if (s == "json-lines")
        return OutputFormat::JsonLines;
    throw ConfigError("format: expected csv or json-lines, got \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------- config

namespace {

class FieldReader {
public:
    FieldReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix))
    {
        if (!j_.is_object())
            throw ConfigError((prefix_.empty() ? std::string("scenario") : prefix_) + ": expected an object");
    }

    bool has(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const char* key, double fallback)
    {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(path(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            throw ConfigError(path(key) + ": must be finite");
        return d;
    }

    std::size_t count(const char* key, std::size_t fallback)
    {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(path(key) + ": expected a non-negative integer");
        return static_cast<std::size_t>(v.get<long long>());
    }

    std::string text(const char* key, std::string fallback)
    {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_string())
            throw ConfigError(path(key) + ": expected a string");
        return v.get<std::string>();
    }

    const json& child(const char* key)
    {
        has(key);
        return j_.at(key);
    }

    void reject_unknown() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k))
                throw ConfigError(path(k) + ": unknown field");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

void require_positive(double v, const std::string& field)
{
    if (!(v > 0))
        throw ConfigError(field + ": must be > 0");
}

} // namespace

Scenario scenario_from_json(const json& j)
{
    FieldReader r(j, "");
    Scenario s;
    s.name = r.text("name", "");
    if (s.name.empty())
        throw ConfigError("name: required, non-empty string");
    s.description = r.text("description", "");

    ProtocolConfig& c = s.config;
    c.model = model_from_string(r.text("model", "II"));
    c.mass = r.number("mass_kg", c.mass);
    c.eta_hp = r.number("eta_hp_T_per_m", c.eta_hp);
    c.eta_ihp = r.number("eta_ihp_T_per_m2", c.eta_ihp);
    c.b0h = r.number("b0h_T", c.b0h);
    c.b0i = r.number("b0i_T", c.b0i);
    c.ihp_stage_phase = r.number("ihp_stage_phase_rad", c.ihp_stage_phase);
    c.validate();
    const DerivedParams p = derive_params(c);

    if (r.has("noise")) {
        FieldReader n(r.child("noise"), "noise");
        const bool ihp_amp = n.has("ihp_amplitude_T_per_m2_rtHz");
        const bool ihp_tilde = n.has("ihp_tilde");
        const bool hp_amp = n.has("hp_amplitude_T_per_m_rtHz");
        const bool hp_tilde = n.has("hp_tilde");
        if (ihp_amp && ihp_tilde)
            throw ConfigError("noise: give either ihp_amplitude_T_per_m2_rtHz or ihp_tilde, not both");
        if (hp_amp && hp_tilde)
            throw ConfigError("noise: give either hp_amplitude_T_per_m_rtHz or hp_tilde, not both");
        if (ihp_amp)
            s.noise_ihp_amplitude = n.number("ihp_amplitude_T_per_m2_rtHz", 0);
        if (ihp_tilde)
            s.noise_ihp_amplitude =
                amplitude_from_tilde(p, NoiseContext::IHPCurvature, n.number("ihp_tilde", 0));
        if (hp_amp)
            s.noise_hp_amplitude = n.number("hp_amplitude_T_per_m_rtHz", 0);
        if (hp_tilde)
            s.noise_hp_amplitude = amplitude_from_tilde(p, NoiseContext::HPGradient, n.number("hp_tilde", 0));
        if (s.noise_ihp_amplitude < 0 || s.noise_hp_amplitude < 0)
            throw ConfigError("noise: amplitudes must be >= 0");
        n.reject_unknown();
    }

    if (!r.has("analyses"))
        throw ConfigError("analyses: required");
    const json& an = r.child("analyses");
    if (!an.is_array())
        throw ConfigError("analyses: expected an array of names");
    std::set<Analysis> set;
    for (const json& a : an) {
        if (!a.is_string())
            throw ConfigError("analyses: expected strings");
        set.insert(analysis_from_string(a.get<std::string>()));
    }
    if (set.empty())
        throw ConfigError("analyses: must not be empty");
    s.analyses.assign(set.begin(), set.end());

    s.sample_step = r.number("sample_step_s", s.sample_step);
    require_positive(s.sample_step, "sample_step_s");
    s.coherence_floor = r.number("coherence_floor", s.coherence_floor);
    if (!(s.coherence_floor > 0 && s.coherence_floor < 1))
        throw ConfigError("coherence_floor: must lie in (0, 1)");
    s.hp_tilde_assumed = r.number("hp_tilde_assumed", s.hp_tilde_assumed);
    if (!(s.hp_tilde_assumed >= 0))
        throw ConfigError("hp_tilde_assumed: must be >= 0");
    s.tau = r.number("tau_s", s.tau);
    require_positive(s.tau, "tau_s");
    s.omega_min = r.number("omega_min_rad_per_s", s.omega_min);
    if (!(s.omega_min >= 0))
        throw ConfigError("omega_min_rad_per_s: must be >= 0");

    if (r.has("transfer")) {
        FieldReader t(r.child("transfer"), "transfer");
        s.transfer_omega_max_over_omega2 = t.number("omega_max_over_omega2", s.transfer_omega_max_over_omega2);
        require_positive(s.transfer_omega_max_over_omega2, "transfer.omega_max_over_omega2");
        s.transfer_points = t.count("points", s.transfer_points);
        if (s.transfer_points < 2)
            throw ConfigError("transfer.points: must be >= 2");
        t.reject_unknown();
    }
    if (r.has("mc")) {
        FieldReader m(r.child("mc"), "mc");
        s.mc.paths = m.count("paths", s.mc.paths);
        if (s.mc.paths < 100)
            throw ConfigError("mc.paths: must be >= 100");
        s.mc.steps = m.count("steps", s.mc.steps);
        if (s.mc.steps < 1)
            throw ConfigError("mc.steps: must be >= 1");
        s.mc.ihp_tilde = m.number("ihp_tilde", s.mc.ihp_tilde);
        if (!(s.mc.ihp_tilde >= 0))
            throw ConfigError("mc.ihp_tilde: must be >= 0");
        m.reject_unknown();
    }
    if (r.has("feasibility")) {
        FieldReader f(r.child("feasibility"), "feasibility");
        s.feasibility_bias = f.number("bias_T", s.feasibility_bias);
        if (!(s.feasibility_bias >= 0))
            throw ConfigError("feasibility.bias_T: must be >= 0");
        s.transverse_gradient = f.number("transverse_gradient_T_per_m", s.transverse_gradient);
        require_positive(s.transverse_gradient, "feasibility.transverse_gradient_T_per_m");
        f.reject_unknown();
    }
    if (r.has("baseline")) {
        FieldReader b(r.child("baseline"), "baseline");
        s.baseline_separation = b.number("separation_m", s.baseline_separation);
        require_positive(s.baseline_separation, "baseline.separation_m");
        b.reject_unknown();
    }
    if (r.has("wavepacket")) {
        FieldReader w(r.child("wavepacket"), "wavepacket");
        s.wavepacket_curve_end = w.number("curve_end_s", s.wavepacket_curve_end);
        require_positive(s.wavepacket_curve_end, "wavepacket.curve_end_s");
        s.wavepacket_points = w.count("points", s.wavepacket_points);
        if (s.wavepacket_points < 2)
            throw ConfigError("wavepacket.points: must be >= 2");
        w.reject_unknown();
    }
    r.reject_unknown();
    return s;
}

json scenario_to_json(const Scenario& s)
{
    json j;
    j["name"] = s.name;
    if (!s.description.empty())
        j["description"] = s.description;
    j["model"] = std::string(to_string(s.config.model));
    j["mass_kg"] = s.config.mass;
    j["eta_hp_T_per_m"] = s.config.eta_hp;
    j["eta_ihp_T_per_m2"] = s.config.eta_ihp;
    j["b0h_T"] = s.config.b0h;
    j["b0i_T"] = s.config.b0i;
    j["ihp_stage_phase_rad"] = s.config.ihp_stage_phase;
    j["noise"] = {{"ihp_amplitude_T_per_m2_rtHz", s.noise_ihp_amplitude},
                  {"hp_amplitude_T_per_m_rtHz", s.noise_hp_amplitude}};
    json an = json::array();
    for (Analysis a : s.analyses)
        an.push_back(std::string(to_string(a)));
    j["analyses"] = an;
    j["sample_step_s"] = s.sample_step;
    j["coherence_floor"] = s.coherence_floor;
    j["hp_tilde_assumed"] = s.hp_tilde_assumed;
    j["tau_s"] = s.tau;
    j["omega_min_rad_per_s"] = s.omega_min;
    j["transfer"] = {{"omega_max_over_omega2", s.transfer_omega_max_over_omega2}, {"points", s.transfer_points}};
    j["mc"] = {{"paths", s.mc.paths}, {"steps", s.mc.steps}, {"ihp_tilde", s.mc.ihp_tilde}};
    j["feasibility"] = {{"bias_T", s.feasibility_bias}, {"transverse_gradient_T_per_m", s.transverse_gradient}};
    j["baseline"] = {{"separation_m", s.baseline_separation}};
    j["wavepacket"] = {{"curve_end_s", s.wavepacket_curve_end}, {"points", s.wavepacket_points}};
    return j;
}

Scenario load_scenario_file(const fs::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw IoError("cannot read scenario file " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::string config_hash(const Scenario& s)
{
    json j = scenario_to_json(s);
    j.erase("name");
    j.erase("description");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------- built-ins

namespace {

Scenario make_builtin(std::string name, std::string description, std::vector<Analysis> analyses,
                      double b0h = 1e-3)
{
    Scenario s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.config = ProtocolConfig::table1();
    s.config.b0h = b0h;
    std::sort(analyses.begin(), analyses.end());
    s.analyses = std::move(analyses);
    return s;
}

std::vector<Scenario> build_builtins()
{
    std::vector<Scenario> v;
    v.push_back(make_builtin("paper-table2", "Model I vs Model II duration and superposition size",
                             {Analysis::ModelCompare}, 0.0));
    v.push_back(make_builtin("paper-fig2", "Five-stage arm trajectories (bias B0H = 0)",
                             {Analysis::Trajectory}, 0.0));
    v.push_back(make_builtin("paper-fig3", "Stage-2 transfer functions F_a, F_b, F_c", {Analysis::Transfer}));
    {
        Scenario s = make_builtin("paper-dephasing", "Dephasing coefficients and coherence",
                                  {Analysis::Dephasing});
        const DerivedParams p = derive_params(s.config);
        s.noise_ihp_amplitude = amplitude_from_tilde(p, NoiseContext::IHPCurvature, 1e-14);
        s.noise_hp_amplitude = amplitude_from_tilde(p, NoiseContext::HPGradient, 1e-7);
        v.push_back(s);
    }
    v.push_back(make_builtin("paper-bounds", "Noise-amplitude bounds at 10% coherence", {Analysis::Bounds}));
    v.push_back(make_builtin("paper-fig4", "Wavepacket width: inverted harmonic vs free, and closure contrast",
                             {Analysis::Wavepacket}, 0.0));
    v.push_back(make_builtin("paper-feasibility", "Quantization-axis point estimates", {Analysis::Feasibility}));
    v.push_back(make_builtin("paper-baseline", "Single-stage harmonic baseline for a 1 um separation",
                             {Analysis::Baseline}));
    v.push_back(make_builtin("paper-mc", "Monte-Carlo stage-2 dephasing at A_tilde = 1e-14",
                             {Analysis::MonteCarlo}));
    v.push_back(make_builtin("table1-field-check", "Trajectory at B0H = 1 mT; checks the H_c1 ceiling",
                             {Analysis::Trajectory}));
    return v;
}

} // namespace

const std::vector<Scenario>& builtin_scenarios()
{
    static const std::vector<Scenario> all = build_builtins();
    return all;
}

const Scenario& builtin_scenario(std::string_view name)
{
    for (const Scenario& s : builtin_scenarios())
        if (s.name == name)
            return s;
    throw ConfigError("scenario: unknown built-in \"" + std::string(name) + "\" (see list-scenarios)");
}

// ---------------------------------------------------------------- output

namespace {

struct Table {
    std::string name;
    std::vector<std::string> columns; ///< header names carry units
    std::vector<std::vector<json>> rows;
};

std::string format_cell(const json& v)
{
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17e", v.get<double>());
        return buf;
    }
    if (v.is_string())
        return v.get<std::string>();
    return v.dump();
}

fs::path write_table(const Table& t, const fs::path& dir, OutputFormat fmt)
{
    const fs::path file = dir / (t.name + (fmt == OutputFormat::Csv ? ".csv" : ".jsonl"));
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    if (fmt == OutputFormat::Csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out << (i ? "," : "") << t.columns[i];
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << format_cell(row[i]);
            out << '\n';
        }
    } else {
        for (const auto& row : t.rows) {
            json o = json::object();
            for (std::size_t i = 0; i < row.size(); ++i)
                o[t.columns[i]] = row[i];
            out << o.dump() << '\n';
        }
    }
    if (!out)
        throw IoError("write failed for " + file.string());
    return file;
}

void write_json(const json& j, const fs::path& file)
{
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot write " + file.string());
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write failed for " + file.string());
}

json state_json(const StagePair& s)
{
    return {{"t_s", s.right.t},
            {"x_R_m", s.right.x},
            {"v_R_m_per_s", s.right.v},
            {"x_L_m", s.left.x},
            {"v_L_m_per_s", s.left.v}};
}

struct Check {
    std::string quantity;
    double reference;
    double computed;
    double tolerance; ///< relative
};

json check_json(const Check& c)
{
    const double rel = std::abs(c.computed - c.reference) / std::abs(c.reference);
    return {{"quantity", c.quantity},   {"reference", c.reference}, {"computed", c.computed},
            {"relative_error", rel},    {"tolerance", c.tolerance}, {"pass", rel <= c.tolerance}};
}

class Runner {
public:
    Runner(const Scenario& s, const RunOptions& o) : s_(s), o_(o), p_(derive_params(s.config)) {}

    RunReport run()
    {
        std::error_code ec;
        fs::create_directories(o_.out_dir, ec);
        if (ec || !fs::is_directory(o_.out_dir))
            throw IoError("cannot create output directory " + o_.out_dir.string());

        report_["scenario"] = s_.name;
        report_["provenance"] = {{"config_hash", config_hash(s_)},
                                 {"seed", o_.seed},
                                 {"tool_version", o_.tool_version}};
        report_["config"] = scenario_to_json(s_);
        report_["derived"] = {{"omega1_rad_per_s", p_.omega1},
                              {"omega2_rad_per_s", p_.omega2},
                              {"lambda", p_.lambda},
                              {"beta", p_.beta},
                              {"H_coeff", p_.h_coeff},
                              {"C_R", p_.force_coeff.right},
                              {"C_L", p_.force_coeff.left},
                              {"N1_R_m", p_.n1.right},
                              {"N1_L_m", p_.n1.left},
                              {"alpha_R", p_.alpha.right},
                              {"alpha_L", p_.alpha.left}};
        summary_["omega1_rad_per_s"] = p_.omega1;
        summary_["omega2_rad_per_s"] = p_.omega2;

        for (Analysis a : s_.analyses) {
            const auto t0 = std::chrono::steady_clock::now();
            switch (a) {
            case Analysis::Trajectory: trajectory(); break;
            case Analysis::Transfer: transfer(); break;
            case Analysis::Dephasing: dephasing(); break;
            case Analysis::Bounds: bounds(); break;
            case Analysis::MonteCarlo: monte_carlo(); break;
            case Analysis::Wavepacket: wavepacket(); break;
            case Analysis::Feasibility: feasibility(); break;
            case Analysis::Baseline: baseline(); break;
            case Analysis::ModelCompare: model_compare(); break;
            }
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            timings_[std::string(to_string(a))] = dt.count();
        }

        report_["summary"] = summary_;
        report_["violations"] = rr_.violations;
        rr_.report = report_;
        rr_.timings = timings_;
        const fs::path rep = o_.out_dir / "report.json";
        write_json(report_, rep);
        rr_.files.push_back(rep);
        const fs::path tim = o_.out_dir / "timings.json";
        write_json(timings_, tim);
        rr_.files.push_back(tim);
        if (o_.tolerance_report) {
            json tr = {{"scenario", s_.name},
                       {"note", "reference values assume the default parameter set"},
                       {"checks", checks_}};
            const fs::path f = o_.out_dir / "tolerance_report.json";
            write_json(tr, f);
            rr_.files.push_back(f);
        }
        return rr_;
    }

private:
    void emit(const Table& t) { rr_.files.push_back(write_table(t, o_.out_dir, o_.format)); }
    void check(std::string q, double ref, double got, double tol)
    {
        checks_.push_back(check_json({std::move(q), ref, got, tol}));
    }

    void trajectory()
    {
        const TrajectoryResult tr = run_protocol(s_.config, {s_.sample_step, 20});
        Table t{"trajectory", {"t_s", "x_R_m", "v_R_m_per_s", "x_L_m", "v_L_m_per_s", "stage"}, {}};
        t.rows.reserve(tr.samples.size());
        for (const auto& smp : tr.samples)
            t.rows.push_back({smp.t, smp.x_right, smp.v_right, smp.x_left, smp.v_left, smp.stage});
        emit(t);

        json stages = json::array();
        for (const StageSolution& st : tr.stages)
            stages.push_back({{"index", st.index},
                              {"kind", st.kind == StageKind::Harmonic ? "harmonic" : "inverted-harmonic"},
                              {"t_start_s", st.t_start},
                              {"t_end_s", st.t_end},
                              {"duration_s", st.duration()},
                              {"N_R_m", st.motion.right.amplitude},
                              {"N_L_m", st.motion.left.amplitude},
                              {"phase_R_rad", st.motion.right.phase},
                              {"phase_L_rad", st.motion.left.phase},
                              {"exit", state_json(st.exit)}});
        json b = {{"model", std::string(to_string(s_.config.model))},
                  {"delta_x_max_m", tr.delta_x_max},
                  {"t_delta_x_max_s", tr.t_delta_x_max},
                  {"total_duration_s", tr.total_duration},
                  {"t_star_s", tr.stages[2].t_star},
                  {"closure_position_residual_m", tr.closure_position_residual},
                  {"closure_velocity_R_m_per_s", tr.closure_velocity_right},
                  {"closure_velocity_L_m_per_s", tr.closure_velocity_left},
                  {"continuity_residual", tr.continuity_residual},
                  {"max_field_T", tr.max_field},
                  {"field_limit_T", kNiobiumHc1},
                  {"field_limit_ok", tr.field_limit_ok},
                  {"stages", stages}};
        report_["trajectory"] = b;
        summary_["delta_x_max_m"] = tr.delta_x_max;
        summary_["total_duration_s"] = tr.total_duration;
        summary_["max_field_T"] = tr.max_field;
        if (!tr.field_limit_ok)
            rr_.violations.push_back("trajectory: max field " + std::to_string(tr.max_field) +
                                     " T exceeds H_c1 = " + std::to_string(kNiobiumHc1) + " T");
        if (s_.config.model == ModelVariant::ModelII) {
            check("delta_x_max_m (Model II)", 1e-6, tr.delta_x_max, 0.10);
            check("total_duration_s (Model II)", 0.307, tr.total_duration, 0.01);
        } else {
            check("delta_x_max_m (Model I)", 1.7e-7, tr.delta_x_max, 0.10);
            check("total_duration_s (Model I)", 0.316, tr.total_duration, 0.01);
        }
    }

    void transfer()
    {
        Table t{"transfer", {"omega_rad_per_s", "F_a", "F_b", "F_c"}, {}};
        const double wmax = s_.transfer_omega_max_over_omega2 * p_.omega2;
        const std::size_t n = s_.transfer_points;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = wmax * static_cast<double>(i) / static_cast<double>(n - 1);
            t.rows.push_back({w, transfer_a(w, p_), transfer_b(w, p_), transfer_c(w, p_)});
        }
        emit(t);
        report_["transfer"] = {{"omega_max_rad_per_s", wmax},
                               {"points", n},
                               {"F_a_at_omega2", transfer_a(p_.omega2, p_)},
                               {"F_b_at_omega2", transfer_b(p_.omega2, p_)},
                               {"F_c_at_omega2", transfer_c(p_.omega2, p_)}};
    }

    void dephasing()
    {
        const NoiseModel ihp{NoiseKind::White, s_.noise_ihp_amplitude, NoiseContext::IHPCurvature};
        const NoiseModel hp{NoiseKind::White, s_.noise_hp_amplitude, NoiseContext::HPGradient};
        const DephasingReport d = dephasing_report(p_, ihp, hp, s_.tau);
        Table t{"dephasing",
                {"component", "closed_form_Hz_per_Atilde2", "quadrature_Hz_per_Atilde2", "tail_estimate_Hz_per_Atilde2",
                 "tail_bound_Hz_per_Atilde2"},
                {}};
        for (const GammaComponent* g : {&d.a, &d.b, &d.c})
            t.rows.push_back({std::string(to_string(g->term)), g->closed_form, g->quadrature, g->tail_estimate,
                              g->tail_bound});
        emit(t);
        auto comp = [](const GammaComponent& g) {
            return json{{"closed_form", g.closed_form},     {"quadrature", g.quadrature},
                        {"tail_estimate", g.tail_estimate}, {"tail_bound", g.tail_bound},
                        {"quadrature_error", g.quadrature_error}, {"omega_cut_rad_per_s", g.omega_cut}};
        };
        report_["dephasing"] = {
            {"per_Atilde2_Hz",
             {{"gamma_a", comp(d.a)},
              {"gamma_b", comp(d.b)},
              {"gamma_c", comp(d.c)},
              {"gamma_stage2", d.gamma_stage2},
              {"gamma_stage2_quadrature", d.gamma_stage2_quadrature},
              {"gamma_ihp_total", d.gamma_ihp_total},
              {"gamma_hp_total", d.gamma_hp_total},
              {"sqrt_coeff_ihp", d.sqrt_coeff_ihp},
              {"sqrt_coeff_hp", d.sqrt_coeff_hp}}},
            {"per_A2",
             {{"gamma_stage2_Hz_per_T2m-4Hz-1", d.gamma_stage2_per_amp2},
              {"gamma_ihp_total_Hz_per_T2m-4Hz-1", d.gamma_ihp_total_per_amp2},
              {"gamma_hp_total_Hz_per_T2m-2Hz-1", d.gamma_hp_total_per_amp2}}},
            {"H_coeff", d.h_coeff},
            {"noise",
             {{"ihp_amplitude_T_per_m2_rtHz", ihp.amplitude},
              {"hp_amplitude_T_per_m_rtHz", hp.amplitude},
              {"ihp_tilde", tilde_from_amplitude(p_, NoiseContext::IHPCurvature, ihp.amplitude)},
              {"hp_tilde", tilde_from_amplitude(p_, NoiseContext::HPGradient, hp.amplitude)}}},
            {"tau_s", d.tau},
            {"gamma_ihp_Hz", d.gamma_ihp},
            {"gamma_hp_Hz", d.gamma_hp},
            {"gamma_total_Hz", d.total.gamma_total},
            {"coherence", d.total.coherence}};
        summary_["gamma_stage2_per_Atilde2"] = d.gamma_stage2;
        summary_["gamma_hp_total_per_Atilde2"] = d.gamma_hp_total;
        summary_["coherence"] = d.total.coherence;
        check("gamma_a closed form", 2.1e23, d.a.closed_form, 0.05);
        check("gamma_b closed form", 5.4e26, d.b.closed_form, 0.05);
        check("gamma_c closed form", 1.3e21, d.c.closed_form, 0.05);
        check("gamma_a quadrature", 2.1e23, d.a.quadrature, 0.05);
        check("gamma_b quadrature", 5.4e26, d.b.quadrature, 0.05);
        check("gamma_c quadrature", 1.3e21, d.c.quadrature, 0.05);
        check("gamma_stage2", 5.6e26, d.gamma_stage2, 0.05);
        check("gamma_hp_total", 1.2e7, d.gamma_hp_total, 0.05);
        check("sqrt_coeff_ihp", 2.8e13, d.sqrt_coeff_ihp, 0.05);
        check("sqrt_coeff_hp", 3.5e3, d.sqrt_coeff_hp, 0.05);
    }

    void bounds()
    {
        json b;
        try {
            const NoiseBounds nb = solve_noise_bounds(p_, s_.coherence_floor, s_.hp_tilde_assumed, s_.tau);
            b = bounds_json(nb);
            b["feasible"] = true;
        } catch (const BoundInfeasible& e) {
            const NoiseBounds nb = solve_noise_bounds(p_, s_.coherence_floor, 0.0, s_.tau);
            b = bounds_json(nb);
            b["hp_tilde_assumed"] = s_.hp_tilde_assumed;
            b["feasible"] = false;
            b["infeasible_reason"] = e.what();
            b.erase("tilde_ihp_joint");
            b.erase("A_ihp_joint_T_per_m2_rtHz");
            rr_.violations.push_back(std::string("bounds: ") + e.what());
        }
        Table t{"bounds", {"quantity", "value"}, {}};
        for (const auto& [k, v] : b.items())
            if (v.is_number())
                t.rows.push_back({k, v});
        emit(t);
        report_["bounds"] = b;
        summary_["tilde_ihp_alone"] = b["tilde_ihp_alone"];
        summary_["tilde_hp_alone"] = b["tilde_hp_alone"];
        check("dephasing budget Hz", 7.4, b["budget_Hz"].get<double>(), 0.02);
        check("tilde_ihp bound", 0.98e-13, b["tilde_ihp_alone"].get<double>(), 0.05);
        check("A_ihp bound T/m^2/rtHz", 1.7e-8, b["A_ihp_alone_T_per_m2_rtHz"].get<double>(), 0.05);
    }

    json bounds_json(const NoiseBounds& nb) const
    {
        return {{"coherence_floor", nb.coherence_floor},
                {"tau_s", nb.tau},
                {"budget_Hz", nb.budget},
                {"sqrt_coeff_ihp", nb.sqrt_coeff_ihp},
                {"sqrt_coeff_hp", nb.sqrt_coeff_hp},
                {"tilde_ihp_alone", nb.tilde_ihp_alone},
                {"tilde_hp_alone", nb.tilde_hp_alone},
                {"A_ihp_alone_T_per_m2_rtHz", amplitude_from_tilde(p_, NoiseContext::IHPCurvature, nb.tilde_ihp_alone)},
                {"A_hp_alone_T_per_m_rtHz", nb.amplitude_hp_alone},
                {"hp_tilde_assumed", nb.hp_tilde_assumed},
                {"A_hp_assumed_T_per_m_rtHz", nb.amplitude_hp_assumed},
                {"tilde_ihp_joint", nb.tilde_ihp},
                {"A_ihp_joint_T_per_m2_rtHz", nb.amplitude_ihp}};
    }

    void monte_carlo()
    {
        const TrajectoryResult tr = run_protocol(s_.config, {s_.sample_step, 20});
        EnsembleOptions eo;
        eo.n_paths = o_.mc_paths.value_or(s_.mc.paths);
        eo.steps = s_.mc.steps;
        eo.master_seed = o_.seed;
        eo.threads = o_.threads;
        eo.amplitude = amplitude_from_tilde(p_, NoiseContext::IHPCurvature, s_.mc.ihp_tilde);
        const EnsembleResult er = run_ensemble(p_, tr.stages[1], eo);

        Table t{"mc_phases", {"path", "seed", "dphi_a_rad", "dphi_b_rad", "dphi_c_rad", "dphi_total_rad"}, {}};
        for (std::size_t i = 0; i < er.samples.size(); ++i) {
            const PhaseSample& ps = er.samples[i];
            t.rows.push_back({i, std::to_string(ps.seed), ps.a, ps.b, ps.c, ps.total});
        }
        emit(t);

        const NoiseModel noise{NoiseKind::White, eo.amplitude, NoiseContext::IHPCurvature};
        auto est = [](const GammaEstimate& g) {
            return json{{"mean_phase_rad", g.mean_phase},
                        {"variance_rate_Hz", g.variance_rate},
                        {"standard_error_Hz", g.standard_error},
                        {"n_paths", g.n_paths}};
        };
        report_["mc"] = {{"n_paths", eo.n_paths},
                         {"steps", eo.steps},
                         {"dt_s", er.dt},
                         {"tau_s", er.tau},
                         {"ihp_tilde", s_.mc.ihp_tilde},
                         {"amplitude_T_per_m2_rtHz", eo.amplitude},
                         {"gamma_a", est(er.estimates.a)},
                         {"gamma_b", est(er.estimates.b)},
                         {"gamma_c", est(er.estimates.c)},
                         {"gamma_total", est(er.estimates.total)},
                         {"closed_form_Hz",
                          {{"gamma_a", gamma_closed_form(TransferTerm::A, noise, p_)},
                           {"gamma_b", gamma_closed_form(TransferTerm::B, noise, p_)},
                           {"gamma_c", gamma_closed_form(TransferTerm::C, noise, p_)}}}};
        summary_["mc_gamma_total_Hz"] = er.estimates.total.variance_rate;
    }

    void wavepacket()
    {
        const TrajectoryResult tr = run_protocol(s_.config, {s_.sample_step, 20});
        const WidthChain wc = width_chain(tr);
        const ClosureContrast cc = closure_contrast(tr, wc);
        const auto curve = width_curve(wc.sigma01, p_.omega2, s_.config.mass, s_.wavepacket_curve_end,
                                       s_.wavepacket_points);
        Table t{"widths", {"t_s", "sigma_IHP_m", "sigma_free_m"}, {}};
        for (const auto& pt : curve)
            t.rows.push_back({pt.t, pt.sigma_inverted, pt.sigma_free});
        emit(t);
        const auto& end = curve.back();
        report_["wavepacket"] = {{"sigma01_m", wc.sigma01},
                                 {"sigma_at_boundaries_m", wc.sigma_at_boundary},
                                 {"sigma05_m", wc.sigma05},
                                 {"amplification", wc.amplification},
                                 {"sigma_p_floor_kg_m_per_s", wc.sigma_p_floor},
                                 {"harmonic_stages_width_preserving", wc.harmonic_stages_approximated},
                                 {"curve_end_s", end.t},
                                 {"sigma_IHP_end_m", end.sigma_inverted},
                                 {"sigma_free_end_m", end.sigma_free},
                                 {"ihp_over_free_end", end.sigma_inverted / end.sigma_free},
                                 {"closure_delta_x_m", cc.delta_x},
                                 {"closure_delta_p_kg_m_per_s", cc.delta_p},
                                 {"contrast", cc.value}};
        summary_["sigma05_m"] = wc.sigma05;
        summary_["contrast"] = cc.value;
        check("sigma01_m", 1.2e-11, wc.sigma01, 0.05);
        check("sigma_p floor kg m/s", 5.7e-39, wc.sigma_p_floor, 0.05);
    }

    void feasibility()
    {
        const FeasibilityReport f =
            feasibility_estimates(s_.config.mass, s_.feasibility_bias, s_.transverse_gradient);
        json b = {{"bias_field_T", f.bias_field},
                  {"larmor_Hz", f.larmor_hz},
                  {"larmor_GHz", f.larmor_hz * 1e-9},
                  {"transverse_gradient_T_per_m", f.transverse_gradient},
                  {"omega_y_rad_per_s", f.omega_y},
                  {"delta_y_m", f.delta_y},
                  {"max_transverse_field_T", f.max_transverse_field},
                  {"bias_dominates", f.bias_dominates}};
        Table t{"feasibility", {"quantity", "value"}, {}};
        for (const auto& [k, v] : b.items())
            if (v.is_number())
                t.rows.push_back({k, v});
        emit(t);
        report_["feasibility"] = b;
        summary_["larmor_Hz"] = f.larmor_hz;
        check("larmor_GHz", 2.8e-2, f.larmor_hz * 1e-9, 0.02);
        check("delta_y_m", 5e-12, f.delta_y, 0.05);
        check("max_transverse_field_T", 1.5e-7, f.max_transverse_field, 0.05);
    }

    void baseline()
    {
        const double eta0 = baseline_gradient_for_separation(s_.baseline_separation, s_.config.mass);
        const BaselineResult b = single_stage_baseline(eta0, s_.config.mass);
        const BaselineResult at_hp = single_stage_baseline(s_.config.eta_hp, s_.config.mass);
        report_["baseline"] = {{"target_separation_m", s_.baseline_separation},
                               {"eta0_T_per_m", eta0},
                               {"period_s", b.period},
                               {"omega0_rad_per_s", b.omega0},
                               {"delta_x_max_m", b.delta_x_max},
                               {"at_eta_hp",
                                {{"eta0_T_per_m", s_.config.eta_hp},
                                 {"delta_x_max_m", at_hp.delta_x_max},
                                 {"period_s", at_hp.period}}}};
        Table t{"baseline", {"eta0_T_per_m", "delta_x_max_m", "period_s"}, {}};
        t.rows.push_back({eta0, b.delta_x_max, b.period});
        t.rows.push_back({s_.config.eta_hp, at_hp.delta_x_max, at_hp.period});
        emit(t);
        summary_["baseline_eta0_T_per_m"] = eta0;
        summary_["baseline_period_s"] = b.period;
        check("baseline eta0 T/m", 15.0, eta0, 0.05);
        check("baseline period s", 6.0, b.period, 0.05);
    }

    void model_compare()
    {
        Table t{"model_compare", {"model", "total_duration_s", "delta_x_max_m", "max_field_T"}, {}};
        json rows = json::array();
        for (ModelVariant m : {ModelVariant::ModelI, ModelVariant::ModelII}) {
            ProtocolConfig c = s_.config;
            c.model = m;
            const TrajectoryResult tr = run_protocol(c, {s_.sample_step, 20});
            const std::string name(to_string(m));
            t.rows.push_back({name, tr.total_duration, tr.delta_x_max, tr.max_field});
            rows.push_back({{"model", name},
                            {"total_duration_s", tr.total_duration},
                            {"delta_x_max_m", tr.delta_x_max},
                            {"max_field_T", tr.max_field},
                            {"field_limit_ok", tr.field_limit_ok}});
            summary_["delta_x_max_m_model_" + name] = tr.delta_x_max;
            summary_["total_duration_s_model_" + name] = tr.total_duration;
            if (!tr.field_limit_ok)
                rr_.violations.push_back("model-compare (" + name + "): max field " + std::to_string(tr.max_field) +
                                         " T exceeds H_c1");
            const bool two = m == ModelVariant::ModelII;
            check("total_duration_s (Model " + name + ")", two ? 0.307 : 0.316, tr.total_duration, 0.01);
            check("delta_x_max_m (Model " + name + ")", two ? 1e-6 : 1.7e-7, tr.delta_x_max, 0.10);
        }
        emit(t);
        report_["model_compare"] = rows;
    }

    const Scenario& s_;
    const RunOptions& o_;
    DerivedParams p_;
    json report_;
    json summary_ = json::object();
    json timings_ = json::object();
    json checks_ = json::array();
    RunReport rr_;
};

} // namespace

RunReport run_scenario(const Scenario& s, const RunOptions& opts)
{
    if (s.analyses.empty())
        throw ConfigError("analyses: must not be empty");
    return Runner(s, opts).run();
}

// ---------------------------------------------------------------- sweep

namespace {

double parse_value(std::string_view tok)
{
    std::string t(tok);
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    double scale = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        scale = pi;
        t.resize(t.size() - 2);
        if (t.empty() || t == "+")
            t = "1";
        else if (t == "-")
            t = "-1";
        if (!t.empty() && t.back() == '*')
            t.pop_back();
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("grid: cannot parse \"" + std::string(tok) + "\"");
    }
    if (used != t.size())
        throw ConfigError("grid: cannot parse \"" + std::string(tok) + "\"");
    return v * scale;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::vector<double> parse_grid(std::string_view grid)
{
    if (grid.empty())
        throw ConfigError("grid: empty");
    std::vector<double> out;
    if (grid.find(':') != std::string_view::npos) {
        const auto parts = split(grid, ':');
        if (parts.size() != 3)
            throw ConfigError("grid: expected start:stop:count");
        const double a = parse_value(parts[0]);
        const double b = parse_value(parts[1]);
        const double nd = parse_value(parts[2]);
        if (nd < 1 || nd != std::floor(nd))
            throw ConfigError("grid: count must be a positive integer");
        const auto n = static_cast<std::size_t>(nd);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
        for (std::string_view tok : split(grid, ','))
            out.push_back(parse_value(tok));
    }
    return out;
}

const std::vector<std::string>& sweepable_parameters()
{
    static const std::vector<std::string> names = {
        "mass_kg",        "eta_hp_T_per_m", "eta_ihp_T_per_m2", "b0h_T",  "b0i_T",
        "ihp_stage_phase_rad", "coherence_floor", "hp_tilde_assumed", "tau_s", "sample_step_s"};
    return names;
}

SweepReport sweep(const std::string& parameter, const std::vector<double>& grid, const Scenario& base,
                  const RunOptions& opts)
{
    const auto& names = sweepable_parameters();
    if (std::find(names.begin(), names.end(), parameter) == names.end())
        throw ConfigError("sweep: unknown parameter \"" + parameter + "\"");
    if (grid.empty())
        throw ConfigError("sweep: grid must not be empty");

    SweepReport sr;
    std::vector<std::string> metrics;
    std::map<std::string, std::vector<double>> series;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        json j = scenario_to_json(base);
        j[parameter] = grid[i];
        const Scenario s = scenario_from_json(j);
        RunOptions o = opts;
        char dir[32];
        std::snprintf(dir, sizeof dir, "point_%03zu", i);
        o.out_dir = opts.out_dir / dir;
        sr.points.push_back(run_scenario(s, o));
        for (const auto& [k, v] : sr.points.back().report["summary"].items()) {
            if (!v.is_number())
                continue;
            if (!series.count(k))
                metrics.push_back(k);
            series[k].push_back(v.get<double>());
        }
    }

    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    Table t{"sweep", {parameter}, {}};
    std::vector<std::string> cols;
    for (const auto& m : metrics)
        if (series[m].size() == grid.size())
            cols.push_back(m);
    for (const auto& m : cols)
        t.columns.push_back(m);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<json> row{grid[i]};
        for (const auto& m : cols)
            row.push_back(series[m][i]);
        t.rows.push_back(row);
    }
    write_table(t, opts.out_dir, opts.format);

    json trends = json::object();
    for (const auto& m : cols) {
        const auto& v = series[m];
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < v.size(); ++i) {
            inc = inc && v[i] >= v[i - 1];
            dec = dec && v[i] <= v[i - 1];
        }
        const auto mx = std::max_element(v.begin(), v.end());
        const auto mn = std::min_element(v.begin(), v.end());
        std::string shape = inc && dec ? "constant" : inc ? "increasing" : dec ? "decreasing" : "non-monotonic";
        trends[m] = {{"trend", shape},
                     {"min", *mn},
                     {"argmin", grid[static_cast<std::size_t>(mn - v.begin())]},
                     {"max", *mx},
                     {"argmax", grid[static_cast<std::size_t>(mx - v.begin())]}};
        if (*mn > 0)
            trends[m]["max_over_min"] = *mx / *mn;
    }
    sr.summary = {{"parameter", parameter}, {"grid", grid}, {"scenario", base.name}, {"metrics", trends}};
    write_json(sr.summary, opts.out_dir / "sweep_summary.json");
    return sr;
}

} // namespace sgsim

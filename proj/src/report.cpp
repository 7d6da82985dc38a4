#include "catejudge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>

namespace catejudge {

namespace fs = std::filesystem;

namespace {

void require_known_keys(const Json& j, std::initializer_list<const char*> allowed,
                        const char* what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw config_error(std::string(what) + ": unknown field '" + it.key() + "'");
    }
}

void check_schema_version(const Json& j, const char* what) {
    if (!j.is_object() || !j.contains("schema_version"))
        throw config_error(std::string(what) + ": missing schema_version");
    if (!j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion)
        throw config_error(std::string(what) + ": schema_version " + j["schema_version"].dump() +
                           " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
}

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error(std::string(what) + ": cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Json parse_json_text(const std::string& text, const char* what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw config_error(std::string(what) + ": malformed JSON");
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw config_error("failed writing '" + path + "'");
}

// Text shown in figures/CSV for a JSON node; numbers keep their dump() form.
std::string cell_text(const Json& node) {
    return node.is_string() ? node.get<std::string>() : node.dump();
}

std::string xy(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

Json estimate_to_json(const ErrorEstimate& est) {
    return Json{{"point", est.point},   {"var_hat", est.var_hat}, {"se", est.se},
                {"ci_lo", est.ci_lo},   {"ci_hi", est.ci_hi},     {"alpha", est.alpha},
                {"n", est.n},           {"width", est.width()}};
}

Json verdict_to_json(const ComparisonVerdict& v) {
    return Json{{"decision", to_string(v.decision)},
                {"basis", to_string(v.basis)},
                {"confidence_level", v.confidence_level}};
}

Json oracle_to_json(const OracleTruth& truth) {
    return Json{{"phi1", truth.phi1},
                {"phi2", truth.phi2},
                {"delta", truth.delta},
                {"mc_se", truth.mc_se},
                {"n_oracle", truth.n_oracle}};
}

namespace {

Json sparse_fn_to_json(const SparseFn& f) {
    return Json{{"intercept", f.intercept}, {"lin", f.lin}, {"sq", f.sq}, {"cross", f.cross}};
}

SparseFn sparse_fn_from_json(const Json& j, const char* what) {
    require_known_keys(j, {"intercept", "lin", "sq", "cross"}, what);
    SparseFn f;
    f.intercept = j.at("intercept").get<double>();
    f.lin = j.at("lin").get<std::vector<double>>();
    f.sq = j.at("sq").get<std::vector<double>>();
    f.cross = j.at("cross").get<std::vector<double>>();
    return f;
}

}  // namespace

Json dgp_to_json(const DgpSpec& dgp) {
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "dgp"},
                {"scenario", to_string(dgp.scenario)},
                {"d", dgp.d},
                {"active", dgp.active},
                {"mu0", sparse_fn_to_json(dgp.mu0)},
                {"mu1", sparse_fn_to_json(dgp.mu1)},
                {"escore", sparse_fn_to_json(dgp.escore)}};
}

DgpSpec dgp_from_json(const Json& j) {
    check_schema_version(j, "dgp file");
    require_known_keys(j, {"schema_version", "kind", "scenario", "d", "active", "mu0", "mu1",
                           "escore"},
                       "dgp file");
    if (!j.contains("kind") || j.at("kind") != "dgp")
        throw config_error("dgp file: kind must be 'dgp'");
    DgpSpec dgp;
    dgp.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    dgp.d = j.at("d").get<std::size_t>();
    dgp.active = j.at("active").get<std::vector<std::size_t>>();
    dgp.mu0 = sparse_fn_from_json(j.at("mu0"), "dgp file mu0");
    dgp.mu1 = sparse_fn_from_json(j.at("mu1"), "dgp file mu1");
    dgp.escore = sparse_fn_from_json(j.at("escore"), "dgp file escore");

    const std::size_t m = dgp.active.size();
    for (std::size_t a : dgp.active)
        if (a >= dgp.d) throw config_error("dgp file: active index out of range");
    for (const SparseFn* f : {&dgp.mu0, &dgp.mu1, &dgp.escore}) {
        if (f->lin.size() != m || (!f->sq.empty() && f->sq.size() != m) ||
            (!f->cross.empty() && f->cross.size() != m * (m - 1) / 2))
            throw config_error("dgp file: coefficient array sizes do not match the active set");
    }
    return dgp;
}

void write_dgp_json(const std::string& path, const DgpSpec& dgp) {
    write_text_file(path, dgp_to_json(dgp).dump(2) + "\n");
}

DgpSpec read_dgp_json(const std::string& path) {
    try {
        return dgp_from_json(parse_json_text(read_text_file(path, "dgp file"), "dgp file"));
    } catch (const Json::exception& ex) {
        throw config_error(std::string("dgp file: ") + ex.what());
    }
}

Json study_config_to_json(const StudyConfig& config) {
    Json methods = Json::array();
    for (Method m : config.methods) methods.push_back(to_string(m));
    return Json{{"scenario", to_string(config.scenario.scenario)},
                {"d", config.scenario.d},
                {"active_fraction", config.scenario.active_fraction},
                {"noise_sd", config.scenario.noise_sd},
                {"n_train", config.scenario.n_train},
                {"n_test", config.scenario.n_test},
                {"n_dgp_draws", config.n_dgp_draws},
                {"n_reps", config.n_reps},
                {"nuisance_option", to_string(config.nuisance)},
                {"methods", methods},
                {"alpha", config.alpha},
                {"folds", config.folds},
                {"n_oracle", config.n_oracle},
                {"base_seed", config.base_seed}};
}

Json metrics_to_json(const MetricsTable& table, const StudyConfig& config) {
    Json rows = Json::array();
    for (const MetricsRow& r : table.rows) {
        rows.push_back(Json{{"method", to_string(r.method)},
                            {"target", r.target},
                            {"n_completed", r.n_completed},
                            {"n_selection", r.n_selection},
                            {"coverage", r.coverage},
                            {"mean_width", r.mean_width},
                            {"mean_abs_error_of_estimate", r.mean_abs_error_of_estimate},
                            {"selection_accuracy", r.selection_accuracy},
                            {"wrong_rate", r.wrong_rate},
                            {"inconclusive_rate", r.inconclusive_rate}});
    }
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "simulate"},
                {"config", study_config_to_json(config)},
                {"metrics", Json{{"rows", rows},
                                 {"attempted", table.attempted},
                                 {"completed", table.completed},
                                 {"failed", table.failed},
                                 {"diagnostics", table.diagnostics}}}};
}

Json fig1_to_json(const Fig1Result& r, std::uint64_t seed) {
    Json estimates = Json::array();
    for (const NamedEstimate& e : r.estimates)
        estimates.push_back(Json{{"name", e.name}, {"estimate", estimate_to_json(e.estimate)}});
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "fig1"},
                {"seed", seed},
                {"oracle", oracle_to_json(r.oracle)},
                {"estimates", estimates}};
}

Json fig2_to_json(const Fig2Result& r, std::uint64_t seed) {
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "fig2"},
                {"seed", seed},
                {"lambda1", r.lambda1},
                {"lambda2", r.lambda2},
                {"oracle", oracle_to_json(r.oracle)},
                {"estimates",
                 Json::array({Json{{"name", "eif_abs_lasso_a"}, {"estimate", estimate_to_json(r.abs1)}},
                              Json{{"name", "eif_abs_lasso_b"}, {"estimate", estimate_to_json(r.abs2)}},
                              Json{{"name", "eif_rel"}, {"estimate", estimate_to_json(r.rel)}}})},
                {"verdict_abs", verdict_to_json(r.verdict_abs)},
                {"verdict_rel", verdict_to_json(r.verdict_rel)}};
}

ParsedRunConfig parse_run_config(const Json& j) {
    check_schema_version(j, "run config");
    require_known_keys(j,
                       {"schema_version", "scenario", "d", "active_fraction", "noise_sd",
                        "n_train", "n_test", "n_dgp_draws", "n_reps", "nuisance_option",
                        "methods", "alpha", "folds", "n_oracle", "base_seed", "out_dir"},
                       "run config");
    ParsedRunConfig out;
    StudyConfig& c = out.study;
    if (j.contains("scenario"))
        c.scenario.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("d")) c.scenario.d = j.at("d").get<std::size_t>();
    if (j.contains("active_fraction"))
        c.scenario.active_fraction = j.at("active_fraction").get<double>();
    if (j.contains("noise_sd")) c.scenario.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("n_train")) c.scenario.n_train = j.at("n_train").get<std::size_t>();
    if (j.contains("n_test")) c.scenario.n_test = j.at("n_test").get<std::size_t>();
    if (j.contains("n_dgp_draws")) c.n_dgp_draws = j.at("n_dgp_draws").get<int>();
    if (j.contains("n_reps")) c.n_reps = j.at("n_reps").get<int>();
    if (j.contains("nuisance_option"))
        c.nuisance = nuisance_option_from_string(j.at("nuisance_option").get<std::string>());
    if (j.contains("methods")) {
        c.methods.clear();
        for (const Json& m : j.at("methods"))
            c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("folds")) c.folds = j.at("folds").get<int>();
    if (j.contains("n_oracle")) c.n_oracle = j.at("n_oracle").get<std::size_t>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("out_dir")) out.out_dir = j.at("out_dir").get<std::string>();
    return out;
}

ParsedRunConfig read_run_config(const std::string& path) {
    try {
        return parse_run_config(parse_json_text(read_text_file(path, "run config"), "run config"));
    } catch (const Json::exception& ex) {
        throw config_error(std::string("run config: ") + ex.what());
    }
}

Json load_results_json(const std::string& path) {
    Json j = parse_json_text(read_text_file(path, "results file"), "results file");
    check_schema_version(j, "results file");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw config_error("results file: missing kind");
    const std::string kind = j["kind"].get<std::string>();
    if (kind != "compare" && kind != "simulate" && kind != "fig1" && kind != "fig2")
        throw config_error("results file: unknown kind '" + kind + "'");
    return j;
}

namespace {

struct DotRow {
    std::string name;
    const Json* est;
};

// Horizontal CI dot plot; reference markers get dashed verticals.
std::string render_dotplot(const std::string& title, const std::vector<DotRow>& rows,
                           const std::vector<std::pair<std::string, const Json*>>& refs) {
    const double width = 780, left = 210, right = 560;
    const double row_h = 34, top = 56;
    const double height = top + row_h * rows.size() + 40;

    double lo = 0.0, hi = 0.0;
    bool have = false;
    auto widen = [&](double v) {
        if (!std::isfinite(v)) return;
        if (!have) { lo = hi = v; have = true; }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (const DotRow& r : rows) {
        widen(r.est->at("ci_lo").get<double>());
        widen(r.est->at("ci_hi").get<double>());
    }
    for (const auto& [name, v] : refs) widen(v->get<double>());
    widen(0.0);
    if (!have) { lo = -1.0; hi = 1.0; }
    if (hi - lo < 1e-12) { lo -= 1.0; hi += 1.0; }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto sx = [&](double v) { return left + (v - lo) / (hi - lo) * right; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg << "<text x=\"16\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    if (lo < 0.0 && 0.0 < hi)
        svg << "<line x1=\"" << xy(sx(0)) << "\" y1=\"" << xy(top - 16) << "\" x2=\"" << xy(sx(0))
            << "\" y2=\"" << xy(height - 28) << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n"
            << "<text x=\"" << xy(sx(0) + 3) << "\" y=\"" << xy(top - 20) << "\">0</text>\n";
    for (const auto& [name, v] : refs) {
        const double x = sx(v->get<double>());
        svg << "<line x1=\"" << xy(x) << "\" y1=\"" << xy(top - 16) << "\" x2=\"" << xy(x)
            << "\" y2=\"" << xy(height - 28) << "\" stroke=\"#c33\" stroke-dasharray=\"5,3\"/>\n";
        svg << "<text x=\"" << xy(x + 3) << "\" y=\"" << xy(height - 14) << "\" fill=\"#c33\">"
            << name << "=" << v->dump() << "</text>\n";
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double y = top + row_h * (static_cast<double>(i) + 0.5);
        const Json& e = *rows[i].est;
        const double x1 = sx(e.at("ci_lo").get<double>());
        const double x2 = sx(e.at("ci_hi").get<double>());
        const double xp = sx(e.at("point").get<double>());
        svg << "<text x=\"8\" y=\"" << xy(y + 4) << "\">" << rows[i].name << "</text>\n";
        svg << "<line x1=\"" << xy(x1) << "\" y1=\"" << xy(y) << "\" x2=\"" << xy(x2)
            << "\" y2=\"" << xy(y) << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
        svg << "<circle cx=\"" << xy(xp) << "\" cy=\"" << xy(y) << "\" r=\"4\" fill=\"#06c\"/>\n";
        svg << "<text x=\"" << xy(left + right + 4) << "\" y=\"" << xy(y + 4) << "\">"
            << e.at("point").dump() << " [" << e.at("ci_lo").dump() << ", "
            << e.at("ci_hi").dump() << "]</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::string render_estimates_svg(const Json& doc) {
    const std::string kind = doc.at("kind").get<std::string>();
    std::vector<DotRow> rows;
    std::vector<std::pair<std::string, const Json*>> refs;
    if (kind == "compare") {
        rows.push_back({doc.at("method").get<std::string>(), &doc.at("estimate")});
    } else if (kind == "fig1" || kind == "fig2") {
        for (const Json& e : doc.at("estimates"))
            rows.push_back({e.at("name").get<std::string>(), &e.at("estimate")});
        const Json& oracle = doc.at("oracle");
        if (kind == "fig1") {
            refs.push_back({"phi1", &oracle.at("phi1")});
            refs.push_back({"phi2", &oracle.at("phi2")});
        }
        refs.push_back({"delta", &oracle.at("delta")});
    } else {
        throw config_error("render_estimates_svg: unsupported kind '" + kind + "'");
    }
    return render_dotplot(kind + " estimates with confidence intervals", rows, refs);
}

std::string render_metric_svg(const Json& doc, const std::string& method,
                              const std::string& metric) {
    const bool is_rate = metric == "coverage" || metric == "selection_accuracy" ||
                         metric == "wrong_rate" || metric == "inconclusive_rate";
    std::vector<std::pair<std::string, const Json*>> bars;  // target -> value node
    for (const Json& row : doc.at("metrics").at("rows"))
        if (row.at("method").get<std::string>() == method)
            bars.push_back({row.at("target").get<std::string>(), &row.at(metric)});
    if (bars.empty())
        throw config_error("render_metric_svg: no rows for method '" + method + "'");

    double vmax = is_rate ? 1.0 : 0.0;
    for (const auto& [t, v] : bars) vmax = std::max(vmax, v->get<double>());
    if (vmax <= 0.0) vmax = 1.0;

    const double width = 150.0 + 140.0 * static_cast<double>(bars.size());
    const double height = 280, base = 230, top = 48;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg << "<text x=\"16\" y=\"24\" font-size=\"14\">" << method << ": " << metric
        << "</text>\n";
    svg << "<line x1=\"40\" y1=\"" << xy(base) << "\" x2=\"" << xy(width - 20) << "\" y2=\""
        << xy(base) << "\" stroke=\"#333\"/>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double v = bars[i].second->get<double>();
        const double h = (base - top) * std::max(0.0, v) / vmax;
        const double x = 70.0 + 140.0 * static_cast<double>(i);
        svg << "<rect x=\"" << xy(x) << "\" y=\"" << xy(base - h) << "\" width=\"80\" height=\""
            << xy(h) << "\" fill=\"#69b\"/>\n";
        svg << "<text x=\"" << xy(x) << "\" y=\"" << xy(base - h - 6) << "\">"
            << bars[i].second->dump() << "</text>\n";
        svg << "<text x=\"" << xy(x) << "\" y=\"" << xy(base + 18) << "\">" << bars[i].first
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace {

std::string estimates_csv(const Json& doc) {
    std::ostringstream out;
    out << "name,point,var_hat,se,ci_lo,ci_hi,alpha,n\n";
    auto emit = [&](const std::string& name, const Json& e) {
        out << name << "," << e.at("point").dump() << "," << e.at("var_hat").dump() << ","
            << e.at("se").dump() << "," << e.at("ci_lo").dump() << "," << e.at("ci_hi").dump()
            << "," << e.at("alpha").dump() << "," << e.at("n").dump() << "\n";
    };
    if (doc.at("kind") == "compare")
        emit(doc.at("method").get<std::string>(), doc.at("estimate"));
    else
        for (const Json& e : doc.at("estimates"))
            emit(e.at("name").get<std::string>(), e.at("estimate"));
    return out.str();
}

std::string metrics_csv(const Json& doc) {
    static const char* cols[] = {"method",
                                 "target",
                                 "n_completed",
                                 "n_selection",
                                 "coverage",
                                 "mean_width",
                                 "mean_abs_error_of_estimate",
                                 "selection_accuracy",
                                 "wrong_rate",
                                 "inconclusive_rate"};
    std::ostringstream out;
    for (std::size_t i = 0; i < std::size(cols); ++i)
        out << cols[i] << (i + 1 < std::size(cols) ? "," : "\n");
    for (const Json& row : doc.at("metrics").at("rows")) {
        for (std::size_t i = 0; i < std::size(cols); ++i)
            out << cell_text(row.at(cols[i])) << (i + 1 < std::size(cols) ? "," : "\n");
    }
    return out.str();
}

}  // namespace

std::vector<std::string> write_report_bundle(const std::string& out_dir, const Json& doc) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, content);
        written.push_back(path);
    };

    emit("results.json", doc.dump(2) + "\n");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "simulate") {
        emit("metrics.csv", metrics_csv(doc));
        std::vector<std::string> methods;
        for (const Json& row : doc.at("metrics").at("rows")) {
            const std::string m = row.at("method").get<std::string>();
            if (std::find(methods.begin(), methods.end(), m) == methods.end())
                methods.push_back(m);
        }
        static const char* metrics[] = {"coverage", "mean_width", "mean_abs_error_of_estimate",
                                        "selection_accuracy"};
        for (const std::string& m : methods)
            for (const char* metric : metrics)
                emit("fig_" + m + "_" + metric + ".svg", render_metric_svg(doc, m, metric));
    } else {
        emit("estimates.csv", estimates_csv(doc));
        emit("fig_" + kind + ".svg", render_estimates_svg(doc));
    }
    return written;
}

}  // namespace catejudge

#include "cli/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "otsym/confset.hpp"
#include "otsym/error.hpp"
#include "otsym/io.hpp"
#include "otsym/reference.hpp"
#include "otsym/simulate.hpp"
#include "otsym/stats.hpp"
#include "otsym/version.hpp"

namespace otsym::cli {

namespace {

struct Common {
  std::string group = "central";
  std::string erd = "gaussian";
  std::string construction = "halton";
  std::string score = "identity";
  std::string calibration = "exact";
  int replications = 999;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output;

  CLI::Option* group_opt = nullptr;
  CLI::Option* construction_opt = nullptr;
  CLI::Option* calibration_opt = nullptr;
};

void add_common(CLI::App& sub, Common& c) {
  c.group_opt = sub.add_option("--group", c.group, "central | sign | spherical | finite:<matrix-file>")
                    ->capture_default_str();
  sub.add_option("--erd", c.erd, "gaussian | uniform | spherical-uniform")
      ->check(CLI::IsMember({"gaussian", "uniform", "spherical-uniform"}))
      ->capture_default_str();
  c.construction_opt = sub.add_option("--construction", c.construction, "random | halton")
                           ->check(CLI::IsMember({"random", "halton"}))
                           ->capture_default_str();
  sub.add_option("--score", c.score, "identity | gaussian-plugin")
      ->check(CLI::IsMember({"identity", "gaussian-plugin"}))
      ->capture_default_str();
  c.calibration_opt = sub.add_option("--calibration", c.calibration, "asymptotic | exact")
                          ->check(CLI::IsMember({"asymptotic", "exact"}))
                          ->capture_default_str();
  sub.add_option("-B,--B", c.replications, "Monte-Carlo null replications")->capture_default_str();
  sub.add_option("--alpha", c.alpha, "test level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub.add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub.add_option("--threads", c.threads, "worker threads (0: OT_SYMMETRY_THREADS or all cores)")
      ->capture_default_str();
  sub.add_option("--output", c.output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

// Incompatible combinations are refused before any data is read.
void validate(const Common& c) {
  if (c.group == "spherical" && parse_erd(c.erd) == ErdKind::Uniform)
    throw Error(ErrorCode::IncompatibleERD, "the uniform ERD is not permissible for spherical symmetry");
}

SymmetryGroup make_group(const std::string& spec, int dim) {
  if (spec == "central") return SymmetryGroup::central(dim);
  if (spec == "sign" || spec == "sign-change") return SymmetryGroup::sign_change(dim);
  if (spec == "spherical") return SymmetryGroup::spherical(dim);
  if (spec.rfind("finite:", 0) == 0) {
    const std::string path = spec.substr(7);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open matrix file '" + path + "'");
    SymmetryGroup g = SymmetryGroup::finite(read_matrix_blocks(in));
    if (g.dim() != dim)
      throw Error(ErrorCode::DimensionMismatch, "group matrices are " + std::to_string(g.dim()) + "x" +
                                                    std::to_string(g.dim()) + " but the data have " +
                                                    std::to_string(dim) + " columns");
    return g;
  }
  throw Error(ErrorCode::InvalidGroup, "unknown group '" + spec + "'");
}

Eigen::MatrixXd load_data(const std::string& path) {
  if (path == "-") return read_csv_matrix(std::cin);
  return read_csv_file(path);
}

Calibration make_calibration(const Common& c) {
  return c.calibration == "asymptotic" ? Calibration::asymptotic() : Calibration::exact(c.replications);
}

ReferenceSet make_reference(const Common& c, const SymmetryGroup& g, std::size_t n) {
  return build_reference(g, parse_erd(c.erd), n, parse_construction(c.construction),
                         derive_seed(c.seed, Stream::Reference));
}

void emit_json(std::ostream& out, nlohmann::json j) {
  j["version"] = kVersion;
  out << j.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw Error(ErrorCode::Parse, "bad number '" + cell + "' in list");
    v.push_back(x);
  }
  return v;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution-free tests of multivariate symmetry via optimal transport", "otsym"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // test
  Common test_c;
  std::string test_input, test_kind = "gwsr", reference_file;
  bool fail_on_reject = false;
  auto* test = app.add_subcommand("test", "Run a symmetry test on a data file");
  add_common(*test, test_c);
  test->add_option("-i,--input", test_input, "CSV data file (n rows, p columns; '-' for stdin)")->required();
  test->add_option("--test", test_kind, "gwsr | sign | hotelling")->capture_default_str();
  test->add_option("--reference-file", reference_file, "reference CSV written by 'reference --emit'");
  test->add_flag("--fail-on-reject", fail_on_reject, "exit with status 2 when the test rejects");

  // null-dist
  Common null_c;
  std::string null_input, null_kind = "gwsr";
  std::size_t null_n = 0;
  int null_dim = 0;
  auto* nulld = app.add_subcommand("null-dist", "Export the Monte-Carlo null distribution");
  add_common(*nulld, null_c);
  nulld->add_option("-i,--input", null_input, "data file; only its shape is used");
  nulld->add_option("-n,--n", null_n, "sample size");
  nulld->add_option("-p,--dim", null_dim, "dimension");
  nulld->add_option("--test", null_kind, "gwsr | sign")->capture_default_str();

  // power
  Common power_c;
  power_c.construction = "random";
  std::string scenario, table_row;
  double lambda = 0.0;
  std::size_t power_n = 0, power_reps = 2000;
  std::vector<std::string> methods;
  auto* power = app.add_subcommand("power", "Empirical power of one scenario");
  add_common(*power, power_c);
  power->add_option("--scenario", scenario, "C1..C10, S1..S10, Sp1..Sp10, EpanechnikovShift, GaussShift");
  power->add_option("--lambda", lambda, "shift added to every coordinate")->capture_default_str();
  power->add_option("--table-row", table_row, "SCENARIO:LAMBDA shorthand, e.g. C1:0.2");
  power->add_option("-n,--n", power_n, "sample size (default: scenario's)");
  power->add_option("--reps", power_reps, "replications")->capture_default_str();
  power->add_option("--method", methods, "gwsr | sign | hotelling (repeatable; default gwsr)");

  // are
  Common are_c;
  std::string law = "EpanechnikovShift";
  double are_lambda = 0.05, ratio = 1.0;
  std::size_t are_n = 0, are_reps = 10000;
  auto* are = app.add_subcommand("are", "Compare GWSR at n with Hotelling at ratio * n");
  add_common(*are, are_c);
  are->add_option("--law", law, "EpanechnikovShift | GaussShift | any scenario")->capture_default_str();
  are->add_option("--lambda", are_lambda, "shift")->capture_default_str();
  are->add_option("--ratio", ratio, "efficiency ratio in (0, 1]")->capture_default_str();
  are->add_option("-n,--n", are_n, "GWSR sample size (default: law's)");
  are->add_option("--reps", are_reps, "replications")->capture_default_str();

  // confset
  Common conf_c;
  std::string conf_input, conf_mode = "grid", conf_kind = "gwsr", lower_text, upper_text;
  int ppa = 41;
  auto* conf = app.add_subcommand("confset", "Confidence set for the center of symmetry");
  add_common(*conf, conf_c);
  conf->add_option("-i,--input", conf_input, "CSV data file")->required();
  conf->add_option("--mode", conf_mode, "grid | hull")->check(CLI::IsMember({"grid", "hull"}))->capture_default_str();
  conf->add_option("--test", conf_kind, "gwsr | sign")->capture_default_str();
  conf->add_option("--points-per-axis", ppa, "grid nodes per axis")->capture_default_str();
  conf->add_option("--lower", lower_text, "comma-separated lower grid corner");
  conf->add_option("--upper", upper_text, "comma-separated upper grid corner");

  // reference
  Common ref_c;
  std::string ref_input, emit = "-";
  std::size_t ref_n = 0;
  int ref_dim = 0;
  auto* refc = app.add_subcommand("reference", "Build and emit a reference set");
  add_common(*refc, ref_c);
  refc->add_option("-i,--input", ref_input, "data file; only its shape is used");
  refc->add_option("-n,--n", ref_n, "number of points");
  refc->add_option("-p,--dim", ref_dim, "dimension");
  refc->add_option("--emit", emit, "output CSV path ('-' for stdout)")->capture_default_str();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    if (test->parsed()) {
      validate(test_c);
      const Eigen::MatrixXd data = load_data(test_input);
      const SymmetryGroup g = make_group(test_c.group, static_cast<int>(data.cols()));
      const TestKind kind = parse_test_kind(test_kind);
      TestReport report;
      if (kind == TestKind::HotellingT2) {
        report = run_hotelling(data, test_c.alpha, make_calibration(test_c));
        report.seed = test_c.seed;
        report.group = g.name();
      } else {
        ReferenceSet ref = [&] {
          if (reference_file.empty()) return make_reference(test_c, g, static_cast<std::size_t>(data.rows()));
          std::ifstream in(reference_file);
          if (!in) throw Error(ErrorCode::Parse, "cannot open reference file '" + reference_file + "'");
          return read_reference_csv(in, g, parse_erd(test_c.erd));
        }();
        if (test_c.score == "gaussian-plugin") ref = ref.with_score(ScoreFunction::gaussian_plugin_from_data(data));
        report = run_test(data, ref, kind, test_c.alpha, make_calibration(test_c), test_c.seed, test_c.threads);
      }
      if (test_c.output == "csv") {
        out << "test,statistic,p_asymptotic,p_exact,p_value,reject\n"
            << to_string(report.kind) << ',' << format_sig6(report.statistic) << ','
            << (report.p_asymptotic ? format_sig6(*report.p_asymptotic) : "") << ','
            << (report.p_exact ? format_sig6(*report.p_exact) : "") << ','
            << format_sig6(report.chosen_p_value()) << ',' << (report.reject ? 1 : 0) << '\n';
      } else {
        emit_json(out, to_json(report));
      }
      return fail_on_reject && report.reject ? 2 : 0;
    }

    if (nulld->parsed() || refc->parsed()) {
      const bool is_null = nulld->parsed();
      Common& c = is_null ? null_c : ref_c;
      validate(c);
      std::size_t n = is_null ? null_n : ref_n;
      int dim = is_null ? null_dim : ref_dim;
      const std::string& input = is_null ? null_input : ref_input;
      if (!input.empty()) {
        const Eigen::MatrixXd data = load_data(input);
        n = static_cast<std::size_t>(data.rows());
        dim = static_cast<int>(data.cols());
      }
      if (n < 1 || dim < 1) throw Error(ErrorCode::Domain, "give --input or both --n and --dim");
      const SymmetryGroup g = make_group(c.group, dim);
      const ReferenceSet ref = make_reference(c, g, n);
      if (!is_null) {
        if (emit == "-") {
          write_reference_csv(out, ref);
        } else {
          std::ofstream f(emit);
          if (!f) throw Error(ErrorCode::Parse, "cannot write '" + emit + "'");
          write_reference_csv(f, ref);
        }
        return 0;
      }
      const TestKind kind = parse_test_kind(null_kind);
      const std::vector<double> null = exact_null(ref, kind, c.replications, c.seed, c.threads);
      if (c.output == "csv") {
        out << "statistic\n";
        for (double v : null) out << format_sig6(v) << '\n';
      } else {
        nlohmann::json values = nlohmann::json::array();
        for (double v : null) values.push_back(sig6(v));
        emit_json(out, {{"test", to_string(kind)},
                        {"B", c.replications},
                        {"seed", c.seed},
                        {"n", n},
                        {"p", dim},
                        {"group", g.name()},
                        {"erd", c.erd},
                        {"reference", {{"construction", c.construction}, {"seed", ref.construction().seed}}},
                        {"values", values}});
      }
      return 0;
    }

    if (power->parsed()) {
      validate(power_c);
      if (!table_row.empty()) {
        const auto colon = table_row.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::Parse, "--table-row expects SCENARIO:LAMBDA");
        scenario = table_row.substr(0, colon);
        lambda = parse_list(table_row.substr(colon + 1)).at(0);
      }
      if (scenario.empty()) throw Error(ErrorCode::UnknownScenario, "give --scenario or --table-row");
      if (power_reps < 1) throw Error(ErrorCode::Domain, "replications must be at least 1");
      const ScenarioSpec spec = make_scenario(scenario, lambda, power_n);
      const SymmetryGroup g = power_c.group_opt->count() ? make_group(power_c.group, spec.p) : scenario_group(spec);
      const Calibration cal =
          power_c.calibration_opt->count() ? make_calibration(power_c) : default_power_calibration(spec.p);
      if (methods.empty()) methods.push_back("gwsr");
      std::vector<MethodSpec> ms;
      for (const auto& m : methods) {
        MethodSpec s;
        s.kind = parse_test_kind(m);
        s.erd = parse_erd(power_c.erd);
        s.construction = parse_construction(power_c.construction);
        s.score = power_c.score == "gaussian-plugin" ? ScoreFunction::Kind::GaussianPlugIn
                                                     : ScoreFunction::Kind::Identity;
        s.calibration = cal;
        ms.push_back(s);
      }
      const auto results = power_study(spec, g, ms, power_reps, power_c.alpha, power_c.seed, power_c.threads);
      if (power_c.output == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : results) arr.push_back(to_json(r));
        emit_json(out, {{"results", arr}, {"seed", power_c.seed}});
      } else {
        write_power_csv(out, results);
      }
      return 0;
    }

    if (are->parsed()) {
      validate(are_c);
      const ScenarioSpec spec = make_scenario(law, are_lambda, are_n);
      const SymmetryGroup g = make_group(are_c.group, spec.p);
      const AreResult r = are_check(spec, g, parse_erd(are_c.erd), spec.n, ratio, are_reps, are_c.alpha, are_c.seed,
                                    are_c.threads);
      if (are_c.output == "csv") {
        write_power_csv(out, {r.gwsr, r.hotelling});
      } else {
        nlohmann::json j = to_json(r);
        j["seed"] = are_c.seed;
        emit_json(out, j);
      }
      return 0;
    }

    if (conf->parsed()) {
      validate(conf_c);
      const Eigen::MatrixXd data = load_data(conf_input);
      const SymmetryGroup g = make_group(conf_c.group, static_cast<int>(data.cols()));
      ConfidenceSetOptions o;
      o.kind = parse_test_kind(conf_kind);
      o.erd = parse_erd(conf_c.erd);
      o.construction = parse_construction(conf_c.construction);
      o.calibration = make_calibration(conf_c);
      o.alpha = conf_c.alpha;
      o.seed = conf_c.seed;
      o.threads = conf_c.threads;
      ConfidenceSet set;
      if (conf_mode == "hull") {
        set = confidence_hull(data, g, o);
      } else {
        GridSpec grid = default_grid(data, ppa);
        if (!lower_text.empty()) {
          const auto v = parse_list(lower_text);
          grid.lower = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (!upper_text.empty()) {
          const auto v = parse_list(upper_text);
          grid.upper = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        set = confidence_grid(data, g, grid, o);
      }
      if (conf_c.output == "csv") {
        write_confset_csv(out, set);
      } else {
        nlohmann::json j = to_json(set);
        j["test"] = conf_kind;
        j["seed"] = conf_c.seed;
        emit_json(out, j);
      }
      return 0;
    }
  } catch (const Error& e) {
    // what() starts with "<code>: "; the code already has its own field
    std::string message = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
    nlohmann::json j{{"error", to_string(e.code())}, {"message", message}};
    err << j.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json j{{"error", "Internal"}, {"message", e.what()}};
    err << j.dump() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace otsym::cli

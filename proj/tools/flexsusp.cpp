// Command-line front end: construct, verify, trace, export, rank, fold-check.
#include "flexsusp/analysis.hpp"
#include "flexsusp/io.hpp"
#include "flexsusp/symmetric.hpp"
#include "flexsusp/text.hpp"
#include "flexsusp/type3.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <random>

namespace fs = flexsusp;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kCertification = 3, kBuild = 4 };

struct Output {
  bool quiet = false;
  bool as_json = false;
  json report = json::object();

  void line(const std::string& s) const {
    if (!quiet && !as_json) std::cout << s << "\n";
  }
  void flush() const {
    if (as_json) std::cout << report.dump(2) << "\n";
  }
};

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int exit_for(const fs::Error& e) {
  switch (e.kind()) {
    case fs::ErrorKind::FlexCertificationFailed:
    case fs::ErrorKind::EmptyInterval:
      return kCertification;
    default:
      return kValidation;
  }
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw fs::Error(fs::ErrorKind::ValidationError, std::string("params field '") + key + "' must be an array");
  std::vector<double> v;
  for (const auto& x : j[key]) {
    if (!x.is_number())
      throw fs::Error(fs::ErrorKind::ValidationError, std::string("params field '") + key + "' must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

int integer(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw fs::Error(fs::ErrorKind::ValidationError, std::string("params field '") + key + "' must be an integer");
  return j[key].get<int>();
}

json parse_params(const std::string& path) {
  const auto text = fs::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw fs::Error(fs::ErrorKind::ParseError, path + ": " + e.what());
  }
}

fs::SuspensionType cli_type(const std::string& tag) {
  auto t = fs::parse_type(tag == "i-oee"     ? "I_OEE"
                          : tag == "ii-aee"  ? "II_AEE"
                          : tag == "ii-oee"  ? "II_OEE"
                          : tag == "iii-oae" ? "III_OAE"
                                             : "III_OAS");
  return *t;
}

void report_failure(Output& out, const fs::BuildFailure& f) {
  out.report["status"] = "build_failure";
  out.report["reason"] = f.reason;
  out.report["nodes"] = f.nodes;
  json res = json::array();
  for (const auto& [name, value] : f.residuals) res.push_back({{"name", name}, {"value", finite_or_null(value)}});
  out.report["residuals"] = res;
  // The residual report is printed even under --quiet.
  if (!out.as_json) {
    std::cerr << "build failed: " << f.reason << " (" << f.nodes << " search nodes)\n";
    if (f.residuals.empty()) std::cerr << "  no residuals recorded\n";
    for (const auto& [name, value] : f.residuals) std::cerr << "  " << name << ": " << fs::number(value, 6) << "\n";
  }
}

int construct(Output& out, const std::string& type_tag, const std::string& params_path, const std::string& out_path,
              std::uint64_t seed) {
  const auto type = cli_type(type_tag);
  const auto j = parse_params(params_path);
  std::optional<fs::ConstructedSuspension> built;

  if (fs::is_type_iii(type)) {
    const auto variant = type == fs::SuspensionType::III_OAE ? fs::Variant::OAE : fs::Variant::OAS;
    const long budget = j.value("search_budget", 100000L);
    const int fold_L = integer(j, "fold_L", 0);
    const int M = integer(j, "M", 3);
    if (j.contains("grid")) {
      const long total = j.value("total_budget", 5000000L);
      auto g = fs::build_III_grid(variant, M, numbers(j, "grid"), fold_L, budget, total);
      out.report["seeds_tried"] = g.seeds_tried;
      if (!g.suspension) {
        report_failure(out, g.best_failure);
        return kBuild;
      }
      built = std::move(g.suspension);
      out.line("grid seed " + std::to_string(g.seeds_tried) + " built after " + std::to_string(g.nodes) +
               " failed search nodes");
    } else {
      fs::TypeIIIParams p;
      p.variant = variant;
      p.M = M;
      p.fold_L = fold_L;
      const auto s = numbers(j, "seed");
      if (s.size() != 4) throw fs::Error(fs::ErrorKind::ValidationError, "params field 'seed' needs l1, m1, l2, m2");
      p.l1 = s[0], p.m1 = s[1], p.l2 = s[2], p.m2 = s[3];
      p.L_odd = numbers(j, "L_odd");
      auto r = fs::build_III(p, budget);
      if (auto* f = std::get_if<fs::BuildFailure>(&r)) {
        report_failure(out, *f);
        return kBuild;
      }
      built = std::get<fs::ConstructedSuspension>(std::move(r));
    }
  } else if (j.contains("random")) {
    std::mt19937_64 rng(seed);
    const int M = integer(j["random"], "M", 3);
    fs::DrawStats stats;
    auto s = fs::random_symmetric(type, M, rng, 1000, &stats);
    if (!s) throw fs::Error(fs::ErrorKind::InvalidHalfParams, "no feasible draw within 1000 attempts");
    s->provenance["rng_seed"] = std::to_string(seed);
    const double gap = fs::max_relative_gap(s->params, s->theta1, s->signs);
    if (!(gap <= 1e-9)) throw fs::Error(fs::ErrorKind::FlexCertificationFailed, "gap " + fs::number(gap, 3));
    built = std::move(s);
  } else {
    const int M = integer(j, "M", 0);
    switch (type) {
      case fs::SuspensionType::I_OEE: built = fs::build_I_OEE({M, numbers(j, "l"), numbers(j, "m"), numbers(j, "L")}); break;
      case fs::SuspensionType::II_OEE: built = fs::build_II_OEE({M, numbers(j, "l"), numbers(j, "m"), numbers(j, "L")}); break;
      default: {
        fs::HalfParamsIIAEE h{M, numbers(j, "l"), numbers(j, "L"), {}};
        if (j.contains("m")) h.m = numbers(j, "m");
        built = fs::build_II_AEE(h);
      }
    }
  }

  fs::write_suspension(out_path, *built);
  out.report["status"] = "ok";
  out.report["out"] = out_path;
  out.report["N"] = built->params.n;
  out.line("wrote " + std::string(fs::to_string(built->type)) + " N=" + std::to_string(built->params.n) + " to " +
           out_path);
  return kOk;
}

int verify(Output& out, const std::string& in, int samples, double tol) {
  const auto s = fs::read_suspension(in);
  fs::VerifyOptions opt;
  opt.samples = samples;
  opt.tol = tol;
  const auto v = fs::verify_flexible(s, opt);
  out.report["flexible"] = v.flexible;
  out.report["inconclusive"] = v.inconclusive;
  out.report["max_rel_gap_deviation"] = v.max_rel_gap_deviation;
  out.report["strong"] = v.strong;
  out.report["min_dihedral_range"] = v.min_dihedral_range;
  out.report["volume_max_abs"] = v.volume_max_abs;
  out.report["interval"] = {v.interval.z_lo, v.interval.z_hi};
  out.line(std::string(v.flexible ? "flexible" : v.inconclusive ? "inconclusive" : "not flexible") + ": " +
           v.details);
  return v.flexible ? kOk : kCertification;
}

int trace(Output& out, const std::string& in, const std::string& csv, int samples) {
  const auto s = fs::read_suspension(in);
  const auto t = fs::dihedral_trace(s, samples, 1.0);
  fs::write_text(csv, fs::trace_csv(t));
  out.report["rows"] = t.samples();
  out.report["feasible"] = t.feasible_count();
  out.line("wrote " + std::to_string(t.samples()) + " rows to " + csv);
  return kOk;
}

int export_frames(Output& out, const std::string& in, int frames, const std::string& dir) {
  const auto s = fs::read_suspension(in);
  const auto paths = fs::export_mesh_frames(s, frames, dir);
  out.report["frames"] = paths.size();
  out.line("wrote " + std::to_string(paths.size()) + " frames and manifest.csv to " + dir);
  return kOk;
}

int rank(Output& out, const std::string& in, double z) {
  const auto s = fs::read_suspension(in);
  const auto e = fs::embed(s.params, z, s.theta1, s.signs);
  const auto r = fs::rigidity_jacobian_rank(e);
  out.report["rank"] = r.rank;
  out.report["flex_dim"] = r.flex_dim;
  out.line("rank " + std::to_string(r.rank) + ", flex dimension " + std::to_string(r.flex_dim));
  return kOk;
}

int fold_check(Output& out, const std::string& in) {
  const auto s = fs::read_suspension(in);
  const auto c = fs::check_flat_states(s);
  auto state = [](const fs::FlatState& f) {
    return json{{"z", f.z},
                {"exists", f.exists},
                {"coplanarity", f.coplanarity},
                {"diameter", f.diameter},
                {"kind", fs::to_string(f.kind)},
                {"mismatch", finite_or_null(f.mismatch)},
                {"ok", f.ok}};
  };
  out.report["ok"] = c.ok;
  out.report["lower"] = state(c.lo);
  out.report["upper"] = state(c.hi);
  out.line(std::string(c.ok ? "two flat states: " : "flat states missing: ") + c.details);
  return c.ok ? kOk : kCertification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct and certify flexible suspensions"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  Output out;
  app.add_option("--seed", seed, "Seed for random draws");
  app.add_flag("--quiet", out.quiet, "Suppress normal output");
  app.add_flag("--json", out.as_json, "Print a JSON report");

  std::string type, params, in, out_path, dir;
  int samples = 33, trace_samples = 65, frames = 5;
  double tol = 1e-9, z = 0;

  auto* c = app.add_subcommand("construct", "Build a suspension from parameters");
  c->add_option("--type", type, "Suspension family")
      ->required()
      ->check(CLI::IsMember({"i-oee", "ii-aee", "ii-oee", "iii-oae", "iii-oas"}));
  c->add_option("--params", params, "Parameter file (JSON)")->required();
  c->add_option("--out", out_path, "Suspension document to write")->required();

  auto* v = app.add_subcommand("verify", "Certify flexibility by closure-gap constancy");
  v->add_option("--in", in, "Suspension document")->required();
  v->add_option("--samples", samples, "Interior z samples")->capture_default_str()->check(CLI::PositiveNumber);
  v->add_option("--tol", tol, "Allowed relative gap")->capture_default_str()->check(CLI::PositiveNumber);

  auto* t = app.add_subcommand("trace", "Write dihedral traces as CSV");
  t->add_option("--in", in, "Suspension document")->required();
  t->add_option("--out", out_path, "CSV file to write")->required();
  t->add_option("--samples", trace_samples, "Chebyshev samples")->capture_default_str()->check(CLI::PositiveNumber);

  auto* x = app.add_subcommand("export", "Write OBJ frames along the flex");
  x->add_option("--in", in, "Suspension document")->required();
  x->add_option("--frames", frames, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  x->add_option("--dir", dir, "Output directory")->required();

  auto* r = app.add_subcommand("rank", "Rigidity matrix rank at one flexion value");
  r->add_option("--in", in, "Suspension document")->required();
  r->add_option("--z", z, "Flexion value |u - w|")->required();

  auto* f = app.add_subcommand("fold-check", "Check the two flat states of a Type III suspension");
  f->add_option("--in", in, "Type III suspension document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  int code = kOk;
  try {
    if (c->parsed()) code = construct(out, type, params, out_path, seed);
    else if (v->parsed()) code = verify(out, in, samples, tol);
    else if (t->parsed()) code = trace(out, in, out_path, trace_samples);
    else if (x->parsed()) code = export_frames(out, in, frames, dir);
    else if (r->parsed()) code = rank(out, in, z);
    else if (f->parsed()) code = fold_check(out, in);
  } catch (const fs::Error& e) {
    out.report["status"] = "error";
    out.report["error"] = e.what();
    if (!out.as_json) std::cerr << e.what() << "\n";
    code = exit_for(e);
  } catch (const std::exception& e) {
    out.report["status"] = "error";
    out.report["error"] = e.what();
    if (!out.as_json) std::cerr << e.what() << "\n";
    code = kValidation;
  }
  out.flush();
  return code;
}

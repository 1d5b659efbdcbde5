#include <filesystem>
#include <functional>
#include <json.hpp>

#include "webrank/abel.hpp"
#include "webrank/error.hpp"
#include "webrank/projective.hpp"
#include "webrank/rank.hpp"
#include "webrank/specfile.hpp"

namespace webrank {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kConfirmOffset = 0x9e3779b97f4a7c15ULL;
constexpr std::size_t kTextChars = 400;

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const IndeterminateError*>(&e)) return "indeterminate";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const DegeneratePairError*>(&e)) return "degenerate-pair";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const InsufficientDomainError*>(&e)) return "insufficient-domain";
  if (dynamic_cast<const ResourceError*>(&e)) return "resource";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const ReductionIncompleteError*>(&e)) return "reduction-incomplete";
  if (dynamic_cast<const VanishingCoefficientError*>(&e)) return "vanishing-coefficient";
  return "internal";
}

Json text(const Expr& e) {
  auto s = to_string_bounded(e, kTextChars);
  return s ? Json(*s) : Json(nullptr);
}

Json sampled(const Expr& e, const SampleConfig& cfg) {
  const ZeroCheck z = check_zero(e, cfg);
  Json j;
  j["zero"] = z.zero;
  j["max_abs"] = z.max_abs;
  j["max_residual"] = z.max_residual;
  j["points"] = z.points;
  j["text"] = text(e);
  return j;
}

// An error (1) outranks indeterminate (2).
int combine_exit(int current, int code) { return current == 1 || code == 1 ? 1 : std::max(current, code); }

SampleConfig confirm(const SampleConfig& cfg) { return cfg.with_seed(cfg.seed + kConfirmOffset); }

// Sampled zero test under both seeds.
bool zero_confirmed(const Expr& e, const SampleConfig& cfg) {
  const bool a = is_identically_zero(e, cfg), b = is_identically_zero(e, confirm(cfg));
  if (a != b) throw IndeterminateError("identity test disagrees across seeds");
  return a;
}

Json curvature_block(const WebSpec& web) {
  Json j;
  const int d = web.degree();
  if (d == 3) {
    j["K"] = sampled(curvature_K(ChartedWeb(web)), web.cfg);
    return j;
  }
  Json subs = Json::array();
  for (const auto& c : combinations(d, 3)) {
    Json s;
    s["indices"] = c;
    s["K"] = sampled(subweb_curvature_normalized(web, {c[0], c[1], c[2]}), web.cfg);
    subs.push_back(s);
  }
  j["subwebs"] = subs;
  j["curvature_function"] = sampled(curvature_function(web), web.cfg);
  return j;
}

Json invariants_block(const WebSpec& web) {
  Json j;
  ChartedWeb cw(web);
  const std::vector<Expr> inv = cw.basic_invariants();
  Json basic = Json::array();
  for (std::size_t i = 1; i < inv.size(); ++i) {
    Json b = sampled(inv[i], web.cfg);
    b["name"] = "a" + std::to_string(i + 1);
    basic.push_back(b);
  }
  j["basic"] = basic;
  j["K"] = sampled(cw.K(), web.cfg);
  j["parallelizable"] = is_parallelizable(web);
  return j;
}

Json rank_block(const WebSpec& web) {
  Json j;
  const int d = web.degree();
  j["bound"] = max_rank_bound(d);
  if (d == 3) {
    const bool flat = zero_confirmed(curvature_K(ChartedWeb(web)), web.cfg);
    j["rank"] = flat ? 1 : 0;
    j["verdict"] = flat ? "rank 1" : "rank 0";
    j["criterion"] = flat ? "rank1.flat" : "rank0.curved";
    return j;
  }
  const RankReport r = d == 4 ? classify_rank4(web) : max_rank_5web(web);
  j["rank"] = r.rank;
  j["verdict"] = r.verdict;
  j["criterion"] = r.criterion;
  j["borderline"] = r.borderline;
  j["confirm_seed"] = r.confirm_seed;
  Json inv = Json::array();
  for (const auto& s : r.invariants) {
    Json e;
    e["name"] = s.name;
    e["weight"] = s.weight;
    e["zero"] = s.zero;
    e["max_abs"] = s.max_abs;
    e["max_residual"] = s.max_residual;
    inv.push_back(e);
  }
  j["invariants"] = inv;
  return j;
}

Json abel_block(const WebSpec& web) {
  const AbelTrace t = abel_trace(web);
  Json j;
  j["terminal_function"] = t.terminal_function + 1;
  j["terminal_order"] = t.terminal_order;
  j["separable"] = t.separable;
  j["terminal"] = t.terminal ? Json(t.terminal->str(kTextChars)) : Json(nullptr);
  j["diagnostic"] = t.diagnostic;
  Json steps = Json::array();
  for (const AbelStep& s : t.steps) {
    Json e;
    e["label"] = std::string(1, s.label);
    e["rule"] = AbelRule{s.rule, s.function, std::nullopt}.name();
    e["equation"] = s.equation.str(kTextChars);
    steps.push_back(e);
  }
  j["steps"] = steps;
  return j;
}

Json geodesic_block(const WebSpec& web) {
  Json j;
  if (web.degree() == 4) {
    j["geodesic"] = true;
    j["reason"] = "a 4-web is geodesic for its own projective structure";
    return j;
  }
  const std::vector<Expr> defects = geodesic_defects(web);
  bool geodesic = true;
  Json ds = Json::array();
  for (const Expr& e : defects) {
    geodesic = zero_confirmed(e, web.cfg) && geodesic;
    ds.push_back(sampled(e, web.cfg));
  }
  j["geodesic"] = geodesic;
  j["defects"] = ds;
  return j;
}

Json linearizable_block(const WebSpec& web, int& exit_code) {
  const LinearizabilityReport r = linearizability_verdict(web);
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["geodesic"] = r.geodesic;
  j["liouville_vanishes"] = r.liouville_vanishes;
  j["liouville_residual"] = r.liouville_residual;
  const WebSpec sub = first_four(web);
  if (web.degree() > 4) j["subweb"] = {1, 2, 3, 4};
  const LiouvilleData L = liouville(sub);
  j["L1"] = sampled(L.L1, web.cfg);
  j["L2"] = sampled(L.L2, web.cfg);
  if (r.verdict == Linearizability::Indeterminate) exit_code = combine_exit(exit_code, 2);
  return j;
}

Json relations_block(const SpecFile& spec) {
  if (spec.relations.empty()) throw ValidationError("the spec file lists no relations");
  Json list = Json::array();
  for (const auto& F : spec.relations) {
    const RelationCheck c = check_relation(spec.web, F);
    Json e;
    Json fs = Json::array();
    for (const Expr& f : F) fs.push_back(to_string(f));
    e["functions"] = fs;
    e["verdict"] = c.holds ? "pass" : "fail";
    e["mean"] = c.mean;
    e["stddev"] = c.stddev;
    e["d_dx_residual"] = c.d_dx.max_residual;
    e["d_dy_residual"] = c.d_dy.max_residual;
    list.push_back(e);
  }
  Json j;
  j["relations"] = list;
  return j;
}

}  // namespace

std::string version() { return "1.0.0"; }

const std::vector<std::string>& report_commands() {
  static const std::vector<std::string> cmds{"analyze", "curvature", "invariants", "rank",
                                             "abel",    "geodesic",  "linearizable", "verify-relation"};
  return cmds;
}

RunResult run_report(const std::string& command, const SpecFile& spec) {
  const auto& cmds = report_commands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
    throw ValidationError("unknown command '" + command + "'");
  }
  const WebSpec& web = spec.web;
  const int d = web.degree();
  int exit_code = 0;

  Json report;
  report["tool"] = "webrank";
  report["version"] = version();
  report["command"] = command;

  Json input;
  input["name"] = web.name;
  input["file"] = std::filesystem::path(spec.origin).filename().string();
  input["sha256"] = spec.digest;
  input["degree"] = d;
  Json fs = Json::array();
  for (const Expr& f : web.functions) fs.push_back(to_string(f));
  input["functions"] = fs;
  if (spec.order.empty()) {
    input["order"] = nullptr;
  } else {
    Json o = Json::array();
    for (int i : spec.order) o.push_back(i + 1);
    input["order"] = o;
  }
  report["input"] = input;

  Json config;
  config["seed"] = web.cfg.seed;
  config["confirm_seed"] = web.cfg.seed + kConfirmOffset;
  config["samples"] = web.cfg.samples;
  config["tol"] = web.cfg.tol;
  config["box"] = {web.box().xmin, web.box().xmax, web.box().ymin, web.box().ymax};
  config["retry_factor"] = web.cfg.retry_factor;
  report["config"] = config;

  Json analyses = Json::object();
  auto guarded = [&](const std::string& name, const std::function<Json()>& fn) {
    try {
      analyses[name] = fn();
    } catch (const std::exception& e) {
      const std::string kind = error_kind(e);
      Json err;
      err["kind"] = kind;
      err["message"] = e.what();
      analyses[name] = Json{{"error", err}};
      exit_code = combine_exit(exit_code, kind == "indeterminate" ? 2 : 1);
    }
  };

  const bool all = command == "analyze";
  if (all || command == "curvature") guarded("curvature", [&] { return curvature_block(web); });
  if (all || command == "invariants") guarded("invariants", [&] { return invariants_block(web); });
  if (all || command == "rank") guarded("rank", [&] { return rank_block(web); });
  if (all || command == "abel") guarded("abel", [&] { return abel_block(web); });
  if ((all && d >= 4) || command == "geodesic") guarded("geodesic", [&] {
    if (d < 4) throw PreconditionError("geodesic needs d >= 4");
    return geodesic_block(web);
  });
  if ((all && d >= 4) || command == "linearizable") {
    guarded("linearizable", [&] { return linearizable_block(web, exit_code); });
  }
  if ((all && !spec.relations.empty()) || command == "verify-relation") {
    guarded("verify-relation", [&] { return relations_block(spec); });
  }
  report["analyses"] = analyses;
  report["exit_code"] = exit_code;
  return {report.dump(2) + "\n", exit_code};
}

}  // namespace webrank

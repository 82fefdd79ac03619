#include "platoon/serialize.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

using nlohmann::json;

json hinf_json(const HinfNorm& h) {
  if (h.is_unbounded()) return "unbounded";
  return h.value();
}

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

json certificate_json(const BoundCertificate& c) {
  json chain = json::array();
  for (const auto& link : c.chain)
    chain.push_back({{"relation", link.relation}, {"lhs", link.lhs}, {"rhs", link.rhs}, {"holds", link.holds}});
  return {{"lower", c.lower}, {"upper", c.upper}, {"value", c.witnessed}, {"holds", c.holds}, {"chain", chain}};
}

json fit_json(const LogLogFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"excluded_smallest", f.excluded_smallest}};
}

}  // namespace

std::string scenario_to_json(const PlatoonTopology& topology, const ReferenceSet& refs) {
  json doc;
  doc["n"] = topology.n();
  doc["k"] = topology.k();
  doc["refs"] = std::vector<VehicleIndex>(refs.refs().begin(), refs.refs().end());
  return doc.dump(2);
}

Scenario scenario_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("scenario JSON: expected an object");
  for (const char* key : {"n", "k", "refs"})
    if (!doc.contains(key)) throw ParameterError(std::string("scenario JSON: missing '") + key + "'");
  if (!doc["n"].is_number_integer() || !doc["k"].is_number_integer())
    throw ParameterError("scenario JSON: 'n' and 'k' must be integers");
  if (!doc["refs"].is_array()) throw ParameterError("scenario JSON: 'refs' must be an array");
  std::vector<VehicleIndex> refs;
  for (const auto& r : doc["refs"]) {
    if (!r.is_number_integer()) throw ParameterError("scenario JSON: reference indices must be integers");
    refs.push_back(r.get<VehicleIndex>());
  }
  const int n = doc["n"].get<int>();
  const int k = doc["k"].get<int>();
  PlatoonTopology topo = build_platoon(n, k);
  ReferenceSet set = ReferenceSet::from_indices(n, std::move(refs));
  if (set.followers().empty()) throw ParameterError("scenario JSON: at least one follower is required");
  return Scenario{topo, set};
}

std::string report_to_json(const RobustnessReport& r) {
  json doc;
  doc["n"] = r.n;
  doc["k"] = r.k;
  doc["refs"] = r.refs;
  doc["lg_spectrum"] = r.lg_spectrum;
  doc["lambda1"] = r.lambda1;
  doc["lambda_max"] = r.lambda_max;
  doc["hinf_velocity"] = hinf_json(r.hinf_velocity);
  doc["hinf_velocity_bounds"] = {{"lower_max_beta", r.hinf_velocity_bounds.lower_max_beta},
                                 {"lower_boundary", r.hinf_velocity_bounds.lower_boundary},
                                 {"upper", hinf_json(r.hinf_velocity_bounds.upper)}};
  doc["hinf_formation"] = r.hinf_formation;
  doc["margin_velocity"] = r.margin_velocity;
  doc["margin_formation"] = r.margin_formation;
  doc["margin_formation_lower_bound"] = r.margin_formation_lb;
  doc["margin_formation_lower_bound_holds"] = r.margin_formation_lb_holds;
  doc["delay_velocity_max"] = r.delay_velocity_max;
  doc["delay_formation_sufficient"] = r.delay_formation_sufficient;
  doc["delay_formation_k"] = r.delay_formation_k;
  doc["delay_k_sufficient"] = r.delay_k_sufficient;
  doc["delay_k_necessary"] = r.delay_k_necessary;
  doc["spectral_radius_formation"] = r.spectral_radius_formation;
  doc["min_refs_nonexpansive"] = r.min_refs_nonexpansive;
  doc["stochasticity_defect"] = number_json(r.stochasticity_defect);
  doc["lambda_min_certificate"] = certificate_json(r.lambda_min_certificate);
  doc["lambda_max_certificate"] = certificate_json(r.lambda_max_certificate);
  if (r.gamma) doc["gamma"] = *r.gamma;
  if (r.gamma_conditions) {
    const auto& g = *r.gamma_conditions;
    doc["gamma_conditions"] = {{"necessary_ok", g.necessary_ok},
                               {"sufficient_ok", g.sufficient_ok},
                               {"sufficient_nonstrict_ok", g.sufficient_nonstrict_ok},
                               {"strictness_gap", g.strictness_gap}};
  }
  return doc.dump(2);
}

std::string report_summary(const RobustnessReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "platoon n=" << r.n << " k=" << r.k << " refs=" << r.refs.size() << " [";
  for (std::size_t i = 0; i < r.refs.size(); ++i) os << (i ? " " : "") << r.refs[i];
  os << "]\n";
  os << "  lambda_1           " << r.lambda1 << "  (certificate " << (r.lambda_min_certificate.holds ? "ok" : "FAILED")
     << ")\n";
  os << "  lambda_max         " << r.lambda_max << "  (certificate "
     << (r.lambda_max_certificate.holds ? "ok" : "FAILED") << ")\n";
  os << "  Hinf velocity      ";
  if (r.hinf_velocity.is_unbounded()) os << "unbounded";
  else os << r.hinf_velocity.value();
  os << "\n  Hinf formation     " << r.hinf_formation << '\n';
  os << "  stability margins  velocity " << r.margin_velocity << ", formation " << r.margin_formation << '\n';
  os << "  delay limits       velocity " << r.delay_velocity_max << ", formation >= " << r.delay_formation_sufficient
     << ", pi/(8k) " << r.delay_k_sufficient << ", pi/(2k) " << r.delay_k_necessary << '\n';
  os << "  refs for ||G||<=1  " << r.min_refs_nonexpansive << '\n';
  if (r.gamma && r.gamma_conditions) {
    os << "  gamma " << *r.gamma << ": necessary " << (r.gamma_conditions->necessary_ok ? "met" : "violated")
       << ", sufficient " << (r.gamma_conditions->sufficient_ok ? "met" : "not met") << '\n';
  }
  return os.str();
}

std::string scaling_to_json(const ScalingResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"n", r.n},
                    {"single_hinf_velocity", r.single_velocity},
                    {"single_hinf_formation", r.single_formation},
                    {"md_refs", r.md_refs},
                    {"md_hinf_velocity", r.md_velocity},
                    {"md_hinf_formation", r.md_formation}});
  json doc;
  doc["k"] = result.k;
  doc["rows"] = rows;
  doc["fits"] = {{"single_velocity", fit_json(result.single_velocity_fit)},
                 {"single_formation", fit_json(result.single_formation_fit)},
                 {"md_velocity", fit_json(result.md_velocity_fit)},
                 {"md_formation", fit_json(result.md_formation_fit)}};
  doc["md_bounded"] = result.md_bounded;
  return doc.dump(2);
}

std::string checks_to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  return json{{"passed", all}, {"checks", arr}}.dump(2);
}

}  // namespace platoon

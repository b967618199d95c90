#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/desparsify.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/testing.hpp"

// JSON-lines reports. Every record carries the schema tag and a record type;
// indices are 1-based as in user-facing input files.
namespace sparsevar::report {

using nlohmann::json;

inline constexpr const char* kSchema = "sparsevar-report/1";

namespace detail {

inline double finite(double v, const char* field) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in report field ") + field);
    return v;
}

inline json base(const char* type) {
    return json{{"schema", kSchema}, {"type", type}};
}

inline void put_index(json& j, const CoefIndex& c) {
    j["eq"] = c.eq + 1;
    j["var"] = c.var + 1;
    j["lag"] = c.lag + 1;
}

} // namespace detail

inline json estimate_record(const DesparsifiedFit& fit, const CoefIndex& c) {
    json j = detail::base("estimate");
    detail::put_index(j, c);
    j["estimate"] = detail::finite(at(fit.a_de, c), "estimate");
    j["se"] = detail::finite(at(fit.se_hat, c), "se");
    j["initial"] = detail::finite(at(fit.a_init, c), "initial");
    j["n"] = fit.n;
    return j;
}

/// `method` is "bootstrap" or "asymptotic"; B and rejected are 0 for the latter.
inline json ci_record(const ConfidenceInterval& ci, const std::string& method, int B, int rejected) {
    json j = detail::base("ci");
    detail::put_index(j, ci.target);
    j["method"] = method;
    j["estimate"] = detail::finite(ci.estimate, "estimate");
    j["se"] = detail::finite(ci.se, "se");
    j["ci_lower"] = detail::finite(ci.lower, "ci_lower");
    j["ci_upper"] = detail::finite(ci.upper, "ci_upper");
    j["level"] = ci.level;
    j["B"] = B;
    j["rejected"] = rejected;
    return j;
}

inline json test_record(const TestResult& r, const GroupSpec& normalized_group, double alpha) {
    json j = detail::base("test");
    j["t_obs"] = detail::finite(r.t_obs, "t_obs");
    j["crit"] = detail::finite(r.crit, "crit");
    j["p_value"] = detail::finite(r.p_value, "p_value");
    j["reject"] = r.reject;
    j["alpha"] = alpha;
    j["B"] = r.B;
    j["rejected"] = r.rejected;
    j["group_size"] = normalized_group.size();
    json contributions = json::array();
    std::size_t i = 0;
    for (const auto& c : normalized_group.g_a) {
        json e{{"kind", "A"}, {"stat", detail::finite(r.per_target[i++], "per_target")}};
        detail::put_index(e, c);
        contributions.push_back(e);
    }
    for (const auto& s : normalized_group.g_sigma)
        contributions.push_back(
            {{"kind", "S"}, {"i", s.i + 1}, {"j", s.j + 1}, {"stat", detail::finite(r.per_target[i++], "per_target")}});
    j["argmax"] = contributions.at(r.argmax);
    j["per_target"] = std::move(contributions);
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

inline json sweep_record(double lambda, const TestResult& r) {
    json j = detail::base("lambda_sweep");
    j["lambda"] = lambda;
    j["t_obs"] = detail::finite(r.t_obs, "t_obs");
    j["crit"] = detail::finite(r.crit, "crit");
    j["p_value"] = detail::finite(r.p_value, "p_value");
    return j;
}

/// Checks the invariants every record must satisfy: schema tag, known type,
/// finite numbers throughout.
inline bool valid_record(const json& j) {
    if (!j.is_object() || j.value("schema", "") != kSchema) return false;
    static const std::vector<std::string> types{"estimate", "ci", "test", "lambda_sweep"};
    const std::string type = j.value("type", "");
    if (std::find(types.begin(), types.end(), type) == types.end()) return false;
    bool ok = true;
    auto walk = [&](auto&& self, const json& v) -> void {
        if (v.is_number_float() && !std::isfinite(v.get<double>())) ok = false;
        if (v.is_structured())
            for (const auto& child : v) self(self, child);
    };
    walk(walk, j);
    return ok;
}

} // namespace sparsevar::report

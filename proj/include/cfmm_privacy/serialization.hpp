// JSON forms of the library's value types. Non-finite numbers are written
// as null and read back as +infinity.
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

#include "cfmm_privacy/analysis.hpp"
#include "cfmm_privacy/attack.hpp"
#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/spec_io.hpp"

namespace cfmm {

using Json = nlohmann::json;

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_from(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    if (!j.is_number()) throw ValidationError("expected a number");
    return j.get<double>();
}

inline Json spec_to_json(const TradingFunctionSpec& s) {
    Json j;
    j["family"] = family_tag(s.family);
    j["n_assets"] = s.n_assets;
    j["params"] = spec_params(s);
    j["degree"] = s.degree ? Json(*s.degree) : Json(nullptr);
    return j;
}

inline TradingFunctionSpec spec_from_json(const Json& j, std::size_t n_assets_hint = 0) {
    if (!j.is_object()) throw ValidationError("trading function must be an object");
    const Family fam = parse_family(j.at("family").get<std::string>());
    Vec params = j.contains("params") ? j.at("params").get<Vec>() : Vec{};
    std::optional<double> degree;
    if (j.contains("degree") && !j.at("degree").is_null()) degree = j.at("degree").get<double>();
    std::size_t n = n_assets_hint;
    if (j.contains("n_assets")) n = j.at("n_assets").get<std::size_t>();
    return make_spec(fam, params, degree, n);
}

inline Json vec_to_json(std::span<const double> v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number_or_null(x));
    return a;
}

inline Vec vec_from_json(const Json& j) {
    if (!j.is_array()) throw ValidationError("expected an array of numbers");
    Vec v;
    for (const auto& x : j) v.push_back(number_from(x));
    return v;
}

inline Json recovery_to_json(const RecoveryResult& r) {
    return Json{{"reserves", vec_to_json(r.reserves)},
                {"lambda", number_or_null(r.lambda)},
                {"residual_price", number_or_null(r.residual_price)},
                {"residual_trade", number_or_null(r.residual_trade)},
                {"unique", r.unique}};
}

inline RecoveryResult recovery_from_json(const Json& j) {
    RecoveryResult r;
    r.reserves = vec_from_json(j.at("reserves"));
    r.lambda = number_from(j.at("lambda"));
    r.residual_price = number_from(j.at("residual_price"));
    r.residual_trade = number_from(j.at("residual_trade"));
    r.unique = j.at("unique").get<bool>();
    return r;
}

inline Json geometry_to_json(const GeometryReport& g) {
    return Json{{"spec_id", g.spec_id},
                {"property", property_name(g.property)},
                {"samples", g.samples},
                {"max_violation", number_or_null(g.max_violation)},
                {"tolerance", g.tolerance},
                {"pass", g.pass}};
}

inline GeometryReport geometry_from_json(const Json& j) {
    GeometryReport g;
    g.spec_id = j.at("spec_id").get<std::string>();
    const auto prop = j.at("property").get<std::string>();
    if (prop == "RayInvariance")
        g.property = GeometryProperty::RayInvariance;
    else if (prop == "ScaleSignPattern")
        g.property = GeometryProperty::ScaleSignPattern;
    else
        throw ValidationError("unknown geometry property '" + prop + "'");
    g.samples = j.at("samples").get<std::size_t>();
    g.max_violation = number_from(j.at("max_violation"));
    g.tolerance = j.at("tolerance").get<double>();
    g.pass = j.at("pass").get<bool>();
    return g;
}

}  // namespace cfmm

// Text forms of trading functions and vectors used on the command line.
//
//   cp            constant product (geometric mean)
//   cm:0.8,0.2    constant mean with weights
//   cs            constant sum
//   curve:1,1     alpha * sum R - beta * sum 1/R
//   ...^p         optional homogeneity degree for cp/cm/cs, e.g. cp^2
#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cfmm_privacy/core.hpp"

namespace cfmm {

inline double parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty()) throw ValidationError("empty number");
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw ValidationError("not a number: '" + std::string(s) + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("not a number: '" + std::string(s) + "'");
    }
}

inline Vec parse_csv(std::string_view s) {
    Vec out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
        out.push_back(parse_number(s.substr(start, end - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline Family parse_family(std::string_view tag) {
    if (tag == "cp" || tag == "constant_product") return Family::ConstantProduct;
    if (tag == "cm" || tag == "constant_mean") return Family::ConstantMean;
    if (tag == "cs" || tag == "constant_sum") return Family::ConstantSum;
    if (tag == "curve" || tag == "curve_like") return Family::CurveLike;
    throw ValidationError("unknown trading-function family '" + std::string(tag) + "'");
}

/// Builds a spec from family, parameter list and optional degree; n_assets
/// is taken from the weights for constant-mean pools.
inline TradingFunctionSpec make_spec(Family family, const Vec& params, std::optional<double> degree, std::size_t n_assets) {
    switch (family) {
        case Family::ConstantProduct:
            if (!params.empty()) throw ValidationError("cp takes no parameters");
            return TradingFunctionSpec::constant_product(n_assets, degree.value_or(1.0));
        case Family::ConstantMean:
            if (n_assets != 0 && params.size() != n_assets)
                throw ValidationError("cm needs one weight per asset");
            return TradingFunctionSpec::constant_mean(params, degree.value_or(1.0));
        case Family::ConstantSum:
            if (!params.empty()) throw ValidationError("cs takes no parameters");
            return TradingFunctionSpec::constant_sum(n_assets, degree.value_or(1.0));
        case Family::CurveLike:
            if (params.size() != 2) throw ValidationError("curve needs exactly two parameters: alpha,beta");
            if (degree) throw ValidationError("curve has no homogeneity degree");
            return TradingFunctionSpec::curve_like(n_assets, params[0], params[1]);
    }
    throw ValidationError("unknown family");
}

/// Parses "family[:params][^degree]"; pass n_assets = 0 when only a
/// constant-mean spec (which carries its own size) is acceptable.
inline TradingFunctionSpec parse_spec(std::string_view text, std::size_t n_assets) {
    std::optional<double> degree;
    if (const auto caret = text.find('^'); caret != std::string_view::npos) {
        degree = parse_number(text.substr(caret + 1));
        text = text.substr(0, caret);
    }
    Vec params;
    std::string_view tag = text;
    if (const auto colon = text.find(':'); colon != std::string_view::npos) {
        tag = text.substr(0, colon);
        params = parse_csv(text.substr(colon + 1));
    }
    return make_spec(parse_family(tag), params, degree, n_assets);
}

inline Vec spec_params(const TradingFunctionSpec& spec) {
    if (spec.family == Family::ConstantMean) return spec.weights;
    if (spec.family == Family::CurveLike) return {spec.alpha, spec.beta};
    return {};
}

}  // namespace cfmm

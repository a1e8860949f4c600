#include "mildhjb/model.hpp"

#include <nlohmann/json.hpp>

namespace mildhjb {

using nlohmann::json;

DiagonalModel::DiagonalModel(std::vector<double> alpha, std::vector<double> q,
                             std::vector<double> g, double m,
                             std::optional<Rates> rates)
    : alpha_(std::move(alpha)), q_(std::move(q)), g_(std::move(g)), m_(m),
      rates_(rates) {
    require(!alpha_.empty(), "DiagonalModel: dim must be >= 1");
    require(q_.size() == alpha_.size() && g_.size() == alpha_.size(),
            "DiagonalModel: alpha, q, g must have equal length");
    require(m_ >= 0.0, "DiagonalModel: growth order m must be >= 0");
    for (double a : alpha_) require(a >= 0.0, "DiagonalModel: alpha_n must be >= 0");
    for (double qn : q_) require(qn > 0.0, "DiagonalModel: q_n must be > 0");
}

std::vector<double> DiagonalModel::semigroup_factor(double t) const {
    std::vector<double> out(alpha_.size());
    for (std::size_t n = 0; n < alpha_.size(); ++n) out[n] = std::exp(-t * alpha_[n]);
    return out;
}

std::vector<double> DiagonalModel::apply_semigroup_matrix(double t, const std::vector<double>& x) const {
    require(x.size() == alpha_.size(), "apply_semigroup_matrix: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) out[n] = std::exp(-t * alpha_[n]) * x[n];
    return out;
}

std::string DiagonalModel::to_json() const {
    json j;
    j["dim"] = dim();
    j["alpha"] = alpha_;
    j["q"] = q_;
    j["g"] = g_;
    j["m"] = m_;
    if (rates_) {
        j["rates"] = {{"alpha_p", rates_->alpha_p}, {"alpha_c", rates_->alpha_c},
                      {"q_p", rates_->q_p},         {"q_c", rates_->q_c},
                      {"g_p", rates_->g_p},         {"g_c", rates_->g_c}};
    }
    return j.dump(2);
}

DiagonalModel DiagonalModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw invalid_input(std::string("model JSON parse error: ") + e.what());
    }
    require(j.contains("alpha") && j.contains("q") && j.contains("g") && j.contains("m"),
            "model JSON: required fields are alpha, q, g, m");
    auto alpha = j.at("alpha").get<std::vector<double>>();
    auto q = j.at("q").get<std::vector<double>>();
    auto g = j.at("g").get<std::vector<double>>();
    const double m = j.at("m").get<double>();
    if (j.contains("dim")) {
        require(j.at("dim").get<std::size_t>() == alpha.size(),
                "model JSON: dim inconsistent with alpha length");
    }
    std::optional<Rates> rates;
    if (j.contains("rates") && !j.at("rates").is_null()) {
        const auto& r = j.at("rates");
        Rates out;
        out.alpha_p = r.value("alpha_p", 0.0);
        out.alpha_c = r.value("alpha_c", 1.0);
        out.q_p = r.value("q_p", 0.0);
        out.q_c = r.value("q_c", 1.0);
        out.g_p = r.value("g_p", 0.0);
        out.g_c = r.value("g_c", 1.0);
        rates = out;
    }
    return DiagonalModel(std::move(alpha), std::move(q), std::move(g), m, rates);
}

}  // namespace mildhjb

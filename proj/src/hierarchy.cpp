#include "invdesc/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "invdesc/rng.hpp"

namespace invdesc {
namespace {

constexpr double kSumTolerance = 1e-12;

int mod(int a, int n) noexcept {
    const int r = a % n;
    return r < 0 ? r + n : r;
}

void check_simplex(double sum, const char* what) {
    if (std::abs(sum - 1.0) > kSumTolerance) throw std::invalid_argument(std::string(what) + " must sum to 1");
}

void check_entry(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " entries must be finite and nonnegative");
    }
}

void check_signal(const Signal& y, const ToyLayeredModel& model) {
    if (static_cast<int>(y.size()) != model.n) throw std::invalid_argument("signal length differs from model n");
    for (int s : y) {
        if (s < 0 || s >= model.alphabet) throw std::invalid_argument("signal symbol outside the alphabet");
    }
}

void check_theta(const ToyLayeredModel& model, int theta) {
    if (theta < 0 || theta >= model.classes()) throw std::out_of_range("class index outside the top table");
}

std::vector<double> random_simplex(CounterRng& rng, std::size_t size) {
    std::vector<double> v(size);
    double sum = 0.0;
    for (double& x : v) {
        x = 0.05 + rng.uniform();
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace

void validate(const ToyLayeredModel& m) {
    if (m.n < 1 || m.alphabet < 1) throw std::invalid_argument("model needs n >= 1 and alphabet >= 1");
    if (m.templates.empty() || m.parts.empty() || m.top.empty()) {
        throw std::invalid_argument("model needs at least one filter per layer and one class");
    }
    for (const auto& t : m.templates) {
        if (static_cast<int>(t.size()) != m.n) throw std::invalid_argument("template length differs from n");
        for (const auto& row : t) {
            if (static_cast<int>(row.size()) != m.alphabet) throw std::invalid_argument("template row size");
            double sum = 0.0;
            for (double v : row) {
                check_entry(v, "template");
                sum += v;
            }
            check_simplex(sum, "each template position");
        }
    }
    for (const auto& h : m.parts) {
        if (h.size() != m.templates.size()) throw std::invalid_argument("part table needs one row per layer-1 filter");
        double sum = 0.0;
        for (const auto& row : h) {
            if (static_cast<int>(row.size()) != m.n) throw std::invalid_argument("part table row size differs from n");
            for (double v : row) {
                check_entry(v, "part table");
                sum += v;
            }
        }
        check_simplex(sum, "each part table");
    }
    for (const auto& t : m.top) {
        if (t.size() != m.parts.size()) throw std::invalid_argument("top table needs one row per layer-2 filter");
        double sum = 0.0;
        for (const auto& row : t) {
            if (static_cast<int>(row.size()) != m.n) throw std::invalid_argument("top table row size differs from n");
            for (double v : row) {
                check_entry(v, "top table");
                sum += v;
            }
        }
        check_simplex(sum, "each top table");
    }
}

Signal cyclic_shift(const Signal& y, int s) {
    const int n = static_cast<int>(y.size());
    Signal out(y.size());
    for (int i = 0; i < n; ++i) out[i] = y[mod(i - s, n)];
    return out;
}

double layer1_likelihood(const Signal& y, const ToyLayeredModel& model, int k, int g1) {
    const auto& t = model.templates.at(k);
    double p = 1.0;
    for (int i = 0; i < model.n; ++i) p *= t[mod(i - g1, model.n)][y[i]];
    return p;
}

double layer2_conditional(const ToyLayeredModel& model, int k, int g1, int j, int g2) {
    return model.parts.at(j).at(k)[mod(g1 + g2, model.n)];
}

double direct_marginal(const Signal& y, const ToyLayeredModel& model, int theta) {
    validate(model);
    check_signal(y, model);
    check_theta(model, theta);
    const int n = model.n;
    const std::size_t k1 = model.templates.size();
    const std::size_t k2 = model.parts.size();
    // joint[((j * n + g2) * K1 + k) * n + g1] = p(y, theta1_k, g1, theta2_j, g2 | theta)
    std::vector<double> joint(k2 * n * k1 * n);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k2; ++j) {
        for (int g2 = 0; g2 < n; ++g2) {
            for (std::size_t k = 0; k < k1; ++k) {
                for (int g1 = 0; g1 < n; ++g1) {
                    joint[idx++] = model.top[theta][j][g2] *
                                   layer2_conditional(model, static_cast<int>(k), g1, static_cast<int>(j), g2) *
                                   layer1_likelihood(y, model, static_cast<int>(k), g1);
                }
            }
        }
    }
    double total = 0.0;
    for (double v : joint) total += v;
    return total;
}

LayeredEvaluation layered_evaluation(const Signal& y, const ToyLayeredModel& model, int theta) {
    validate(model);
    check_signal(y, model);
    check_theta(model, theta);
    const int n = model.n;
    LayeredEvaluation ev;
    ev.feature1.assign(model.templates.size(), std::vector<double>(n));
    for (int k = 0; k < model.k1(); ++k) {
        for (int g1 = 0; g1 < n; ++g1) ev.feature1[k][g1] = layer1_likelihood(y, model, k, g1);
    }
    ev.feature2.assign(model.parts.size(), std::vector<double>(n, 0.0));
    for (int j = 0; j < model.k2(); ++j) {
        for (int g2 = 0; g2 < n; ++g2) {
            double acc = 0.0;
            for (int k = 0; k < model.k1(); ++k) {
                const auto& h = model.parts[j][k];
                for (int g1 = 0; g1 < n; ++g1) acc += ev.feature1[k][g1] * h[mod(g1 + g2, n)];
            }
            ev.feature2[j][g2] = acc;
        }
    }
    for (int j = 0; j < model.k2(); ++j) {
        for (int g2 = 0; g2 < n; ++g2) ev.marginal += ev.feature2[j][g2] * model.top[theta][j][g2];
    }
    return ev;
}

double layered_marginal(const Signal& y, const ToyLayeredModel& model, int theta) {
    return layered_evaluation(y, model, theta).marginal;
}

void validate(const MixtureWeights& w) {
    if (w.w.empty() || w.w.front().empty()) throw std::invalid_argument("MixtureWeights: empty table");
    double sum = 0.0;
    for (const auto& row : w.w) {
        if (row.size() != w.w.front().size()) throw std::invalid_argument("MixtureWeights: ragged table");
        for (double v : row) {
            check_entry(v, "mixture weight");
            sum += v;
        }
    }
    check_simplex(sum, "mixture weights");
}

double receptive_mixture(const std::vector<std::vector<double>>& feature_values, const MixtureWeights& w) {
    validate(w);
    if (feature_values.size() != w.w.size()) throw std::invalid_argument("receptive_mixture: class count mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < w.w.size(); ++k) {
        if (feature_values[k].size() != w.w[k].size()) {
            throw std::invalid_argument("receptive_mixture: receptive-field count mismatch");
        }
        for (std::size_t j = 0; j < w.w[k].size(); ++j) total += feature_values[k][j] * w.w[k][j];
    }
    return total;
}

std::vector<int> compose_small_shifts(int g, int step) {
    if (step < 1) throw std::invalid_argument("compose_small_shifts: step must be >= 1");
    const int sign = g < 0 ? -1 : 1;
    int remaining = std::abs(g);
    std::vector<int> factors;
    while (remaining > 0) {
        const int f = std::min(step, remaining);
        factors.push_back(sign * f);
        remaining -= f;
    }
    return factors;
}

ToyLayeredModel random_toy_model(CounterRng& rng, const ToyModelShape& s) {
    if (s.n < 1 || s.alphabet < 1 || s.k1 < 1 || s.k2 < 1 || s.classes < 1 || s.part_support < 0 ||
        s.part_support > s.n) {
        throw std::invalid_argument("random_toy_model: invalid shape");
    }
    const int support = s.part_support == 0 ? s.n : s.part_support;
    ToyLayeredModel m;
    m.n = s.n;
    m.alphabet = s.alphabet;
    for (int k = 0; k < s.k1; ++k) {
        std::vector<std::vector<double>> t;
        for (int i = 0; i < s.n; ++i) t.push_back(random_simplex(rng, static_cast<std::size_t>(s.alphabet)));
        m.templates.push_back(std::move(t));
    }
    for (int j = 0; j < s.k2; ++j) {
        // Spread the support over consecutive relative poses starting at a random one.
        const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.n)));
        const auto w = random_simplex(rng, static_cast<std::size_t>(s.k1 * support));
        std::vector<std::vector<double>> h(s.k1, std::vector<double>(s.n, 0.0));
        for (int k = 0; k < s.k1; ++k) {
            for (int q = 0; q < support; ++q) h[k][mod(start + q, s.n)] = w[static_cast<std::size_t>(k * support + q)];
        }
        m.parts.push_back(std::move(h));
    }
    for (int c = 0; c < s.classes; ++c) {
        const auto w = random_simplex(rng, static_cast<std::size_t>(s.k2 * s.n));
        std::vector<std::vector<double>> t(s.k2, std::vector<double>(s.n));
        for (int j = 0; j < s.k2; ++j) {
            for (int g = 0; g < s.n; ++g) t[j][g] = w[static_cast<std::size_t>(j * s.n + g)];
        }
        m.top.push_back(std::move(t));
    }
    return m;
}

std::vector<Signal> enumerate_signals(int n, int alphabet) {
    if (n < 1 || alphabet < 1) throw std::invalid_argument("enumerate_signals: need n, alphabet >= 1");
    const double count = std::pow(static_cast<double>(alphabet), n);
    if (count > 1e7) throw std::invalid_argument("enumerate_signals: too many signals to enumerate");
    std::vector<Signal> out;
    Signal y(n, 0);
    for (;;) {
        out.push_back(y);
        int i = n - 1;
        while (i >= 0 && ++y[i] == alphabet) y[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

std::string to_json(const ToyLayeredModel& m) {
    return nlohmann::json{{"n", m.n},
                          {"alphabet", m.alphabet},
                          {"templates", m.templates},
                          {"parts", m.parts},
                          {"top", m.top}}
        .dump();
}

ToyLayeredModel model_from_json(const std::string& text) {
    ToyLayeredModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.n = j.at("n").get<int>();
        m.alphabet = j.at("alphabet").get<int>();
        m.templates = j.at("templates").get<decltype(m.templates)>();
        m.parts = j.at("parts").get<decltype(m.parts)>();
        m.top = j.at("top").get<decltype(m.top)>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed model JSON: ") + e.what());
    }
    validate(m);
    return m;
}

}  // namespace invdesc

/**
 * @file hierarchy.hpp
 * @brief Two-layer marginalization over cyclic shifts, small enough to check
 * by exhaustive summation.
 *
 * Signals are words y in {0, ..., A-1}^n and the nuisance group is Z_n
 * acting by cyclic shifts. Layer-1 filter k at pose g1 explains the signal
 * through a per-position template shifted by g1. Layer-2 filter j at pose g2
 * places layer-1 parts through a table h_j(k, g) read at g = g1 + g2, so the
 * part layout travels with its parent (weight sharing). A top table per
 * class theta mixes the layer-2 filters over their poses.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace invdesc {

class CounterRng;

/// Symbols of a length-n signal.
using Signal = std::vector<int>;

struct ToyLayeredModel {
    int n = 1;
    int alphabet = 2;
    /// templates[k][i][a] = probability of symbol a at position i (pose 0); sums over a to 1.
    std::vector<std::vector<std::vector<double>>> templates;
    /// parts[j][k][g] = h_j(k, g); sums over (k, g) to 1.
    std::vector<std::vector<std::vector<double>>> parts;
    /// top[theta][j][g2]; sums over (j, g2) to 1.
    std::vector<std::vector<std::vector<double>>> top;

    int k1() const noexcept { return static_cast<int>(templates.size()); }
    int k2() const noexcept { return static_cast<int>(parts.size()); }
    int classes() const noexcept { return static_cast<int>(top.size()); }
};

/// Throws std::invalid_argument on ragged, negative or unnormalized tables.
void validate(const ToyLayeredModel& model);

/// shift(y, s)[i] = y[(i - s) mod n].
Signal cyclic_shift(const Signal& y, int s);

/// p(y | theta1_k, g1) = prod_i templates[k][(i - g1) mod n][y_i].
double layer1_likelihood(const Signal& y, const ToyLayeredModel& model, int k, int g1);

/// p(theta1_k, g1 | theta2_j, g2) = parts[j][k][(g1 + g2) mod n].
double layer2_conditional(const ToyLayeredModel& model, int k, int g1, int j, int g2);

/// Builds the full joint over (j, g2, k, g1), recomputing every layer-1 term,
/// and sums it.
double direct_marginal(const Signal& y, const ToyLayeredModel& model, int theta);

struct LayeredEvaluation {
    /// feature1[k][g1] = p(y | theta1_k, g1).
    std::vector<std::vector<double>> feature1;
    /// feature2[j][g2] = sum_{k, g1} feature1[k][g1] p(theta1_k, g1 | theta2_j, g2).
    std::vector<std::vector<double>> feature2;
    double marginal = 0.0;
};

/// Feature maps once per layer, then the top mixture.
LayeredEvaluation layered_evaluation(const Signal& y, const ToyLayeredModel& model, int theta);
double layered_marginal(const Signal& y, const ToyLayeredModel& model, int theta);

/// w[k][j] over (class k, receptive field j); all entries sum to 1.
struct MixtureWeights {
    std::vector<std::vector<double>> w;
};

void validate(const MixtureWeights& w);

/// sum_{k, j} feature_values[k][j] w[k][j].
double receptive_mixture(const std::vector<std::vector<double>>& feature_values, const MixtureWeights& w);

/// Signed factors of magnitude <= step whose sum is g; ceil(|g| / step) of them.
std::vector<int> compose_small_shifts(int g, int step);

struct ToyModelShape {
    int n = 4;
    int alphabet = 2;
    int k1 = 2;
    int k2 = 2;
    int classes = 1;
    /// Number of relative poses each layer-2 part table may use (1..n).
    int part_support = 0;
};

/// Random model with strictly positive entries on the chosen supports.
ToyLayeredModel random_toy_model(CounterRng& rng, const ToyModelShape& shape);

/// Every signal of the model's alphabet and length, in lexicographic order.
std::vector<Signal> enumerate_signals(int n, int alphabet);

std::string to_json(const ToyLayeredModel& model);
ToyLayeredModel model_from_json(const std::string& text);

}  // namespace invdesc

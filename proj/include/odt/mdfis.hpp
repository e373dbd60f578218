#pragma once

#include "odt/features.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace odt {

/// Maximum-dissimilarity split with small-group protection for the
/// validation set. Indices throughout are labeled-row indices.
struct SplitConfig {
    Eigen::Index n_validation = 20;
    Eigen::Index n_test = 20;
    Eigen::Index small_group_threshold = 3;
    Eigen::Index n_initial = 1; // random initial candidates; 1 = pure random start
    std::uint64_t seed = 42;
    std::optional<std::vector<Eigen::Index>> test_indices;
};

struct SplitResult {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> validation;
    std::vector<Eigen::Index> test;
};

using RowGroups = std::map<std::string, std::vector<Eigen::Index>>;

/// Rows from groups smaller than `threshold` become `protected_rows` (barred
/// from validation); the rest form the eligible pool. Both lists ascend.
struct GroupFilterResult {
    std::vector<Eigen::Index> eligible_pool;
    std::vector<Eigen::Index> protected_rows;
};

GroupFilterResult small_group_filter(const RowGroups& groups, Eigen::Index threshold);

double euclidean_distance(Eigen::Ref<const Eigen::VectorXd> a,
                          Eigen::Ref<const Eigen::VectorXd> b);

// Unbiased draw from [0, n) using only the engine's specified output
// sequence, so results are identical across standard libraries.
std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n);

/// Draws n_initial candidate rows from the pool and returns the most central
/// one: the candidate whose minimum distance to the remaining pool is
/// smallest. Ties break toward the lowest row index.
Eigen::Index select_initial(const Eigen::MatrixXd& features,
                            const std::vector<Eigen::Index>& pool,
                            Eigen::Index n_initial, std::mt19937_64& rng);

/// Selection cost evaluated for each candidate each greedy step; the selector
/// picks the argmax. Swap in a different functor to change the criterion
/// without touching the selection loop.
using SelectionCost = std::function<double(const Eigen::MatrixXd& features,
                                           Eigen::Index candidate,
                                           const std::vector<Eigen::Index>& selected)>;

/// Classical maximin cost: minimum distance from the candidate to the
/// selected set (+inf when nothing is selected yet).
double maximin_cost(const Eigen::MatrixXd& features, Eigen::Index candidate,
                    const std::vector<Eigen::Index>& selected);

/// Deterministic stand-in for the expert-picked representative test set:
/// groups at or above the small-group threshold (all groups when none
/// qualify), largest first, contribute their most medoid-central rows round
/// robin until n_test rows are chosen. Needs no seed.
std::vector<Eigen::Index> representative_test_rows(const Eigen::MatrixXd& features,
                                                   const RowGroups& groups,
                                                   Eigen::Index threshold, Eigen::Index n_test);

/// Greedy dissimilarity selection: k times, pick the pool row with the
/// highest cost against everything selected so far (ties -> lowest row
/// index), append it and remove it from the pool. Returns the k picks in
/// selection order.
std::vector<Eigen::Index> maximin_select(const Eigen::MatrixXd& features,
                                         std::vector<Eigen::Index> pool,
                                         std::vector<Eigen::Index> selected,
                                         Eigen::Index k,
                                         const SelectionCost& cost = maximin_cost);

/// Full MD-FIS split: test rows first (explicit list, else the deterministic
/// representative selection), then the small-group filter on the remainder,
/// a representative initial row, and greedy dissimilarity selection of the
/// validation set. Everything else, protected rows included, trains.
SplitResult split(const EncodedDataset& dataset, const RowGroups& groups,
                  const SplitConfig& config);

/// Baseline: seeded shuffle, first n_test rows test, next n_validation rows
/// validation.
SplitResult split_random(Eigen::Index n_rows, const SplitConfig& config);

/// Baseline: plain maximum dissimilarity without the small-group filter.
SplitResult split_maximin(const EncodedDataset& dataset, const SplitConfig& config);

/// Asserts the SplitResult partition invariants against n_rows; throws
/// ValidationError on violation.
void check_partition(const SplitResult& result, Eigen::Index n_rows);

// Split file round-trip ("train:"/"validation:"/"test:" lines of
// comma-separated indices). The CLI stores corpus row indices in these files.
std::string serialize_split(const SplitResult& result);
SplitResult parse_split(std::string_view text);

} // namespace odt

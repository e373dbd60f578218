#include "odt/mdfis.hpp"

#include "odt/csv.hpp"
#include "odt/errors.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace odt {

namespace {

// Draws `count` distinct rows from `pool` via partial Fisher-Yates; the
// result keeps the draw order.
std::vector<Eigen::Index> sample_rows(const std::vector<Eigen::Index>& pool,
                                      Eigen::Index count, std::mt19937_64& rng) {
    std::vector<Eigen::Index> rows = pool;
    const auto n = static_cast<std::uint64_t>(rows.size());
    const auto k = std::min<std::uint64_t>(static_cast<std::uint64_t>(count), n);
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + bounded_uniform(rng, n - i);
        std::swap(rows[i], rows[j]);
    }
    rows.resize(static_cast<std::size_t>(k));
    return rows;
}

std::vector<Eigen::Index> sorted(std::vector<Eigen::Index> rows) {
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
}

std::vector<Eigen::Index> difference(const std::vector<Eigen::Index>& universe,
                                     const std::vector<Eigen::Index>& removed) {
    const std::set<Eigen::Index> gone(removed.begin(), removed.end());
    std::vector<Eigen::Index> rest;
    for (const auto r : universe) {
        if (!gone.contains(r)) rest.push_back(r);
    }
    return rest;
}

RowGroups restrict_groups(const RowGroups& groups, const std::vector<Eigen::Index>& rows) {
    const std::set<Eigen::Index> keep(rows.begin(), rows.end());
    RowGroups out;
    for (const auto& [api, members] : groups) {
        std::vector<Eigen::Index> kept;
        for (const auto r : members) {
            if (keep.contains(r)) kept.push_back(r);
        }
        if (!kept.empty()) out.emplace(api, std::move(kept));
    }
    return out;
}

void validate_config(const SplitConfig& config, Eigen::Index n_rows) {
    if (config.n_validation < 0 || config.n_test < 0) {
        throw ValidationError("split sizes must be non-negative");
    }
    if (config.small_group_threshold < 1) {
        throw ValidationError("small-group threshold must be at least 1");
    }
    if (config.n_initial < 1) throw ValidationError("n_initial must be at least 1");
    const Eigen::Index n_test = config.test_indices
                                    ? static_cast<Eigen::Index>(config.test_indices->size())
                                    : config.n_test;
    if (config.n_validation + n_test >= n_rows) {
        throw ValidationError("validation + test size (" +
                              std::to_string(config.n_validation + n_test) +
                              ") must be smaller than the eligible record count (" +
                              std::to_string(n_rows) + ")");
    }
}

std::vector<Eigen::Index> validated_test_indices(const SplitConfig& config,
                                                 Eigen::Index n_rows) {
    std::set<Eigen::Index> seen;
    for (const auto r : *config.test_indices) {
        if (r < 0 || r >= n_rows) {
            throw ValidationError("explicit test index " + std::to_string(r) +
                                  " is out of range");
        }
        if (!seen.insert(r).second) {
            throw ValidationError("explicit test index " + std::to_string(r) + " repeats");
        }
    }
    return sorted(*config.test_indices);
}

} // namespace

GroupFilterResult small_group_filter(const RowGroups& groups, Eigen::Index threshold) {
    if (threshold < 1) throw ValidationError("small-group threshold must be at least 1");
    GroupFilterResult out;
    for (const auto& [api, members] : groups) {
        auto& dest = static_cast<Eigen::Index>(members.size()) < threshold ? out.protected_rows
                                                                           : out.eligible_pool;
        dest.insert(dest.end(), members.begin(), members.end());
    }
    std::sort(out.eligible_pool.begin(), out.eligible_pool.end());
    std::sort(out.protected_rows.begin(), out.protected_rows.end());
    return out;
}

double euclidean_distance(Eigen::Ref<const Eigen::VectorXd> a,
                          Eigen::Ref<const Eigen::VectorXd> b) {
    if (a.size() != b.size()) {
        throw ValidationError("distance between vectors of different dimensions (" +
                              std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    return (a - b).norm();
}

std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw ValidationError("bounded_uniform over an empty range");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

Eigen::Index select_initial(const Eigen::MatrixXd& features,
                            const std::vector<Eigen::Index>& pool, Eigen::Index n_initial,
                            std::mt19937_64& rng) {
    if (pool.empty()) throw ValidationError("select_initial over an empty pool");
    if (n_initial < 1) throw ValidationError("n_initial must be at least 1");

    const auto candidates = sample_rows(pool, n_initial, rng);

    Eigen::Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto c : candidates) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (const auto r : pool) {
            if (r == c) continue;
            min_dist = std::min(min_dist, euclidean_distance(features.row(c), features.row(r)));
        }
        if (best == -1 || min_dist < best_dist || (min_dist == best_dist && c < best)) {
            best_dist = min_dist;
            best = c;
        }
    }
    return best;
}

double maximin_cost(const Eigen::MatrixXd& features, Eigen::Index candidate,
                    const std::vector<Eigen::Index>& selected) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto s : selected) {
        min_dist = std::min(min_dist,
                            euclidean_distance(features.row(candidate), features.row(s)));
    }
    return min_dist;
}

std::vector<Eigen::Index> representative_test_rows(const Eigen::MatrixXd& features,
                                                   const RowGroups& groups,
                                                   Eigen::Index threshold, Eigen::Index n_test) {
    if (n_test == 0) return {};

    // groups ordered largest first; RowGroups already sorts names for ties
    std::vector<const std::vector<Eigen::Index>*> ordered;
    for (const auto& [api, members] : groups) {
        if (static_cast<Eigen::Index>(members.size()) >= threshold) ordered.push_back(&members);
    }
    if (ordered.empty()) {
        for (const auto& [api, members] : groups) ordered.push_back(&members);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });

    Eigen::Index available = 0;
    for (const auto* members : ordered) available += static_cast<Eigen::Index>(members->size());
    if (n_test > available) {
        throw ValidationError("cannot select " + std::to_string(n_test) +
                              " representative test rows from " + std::to_string(available) +
                              " eligible rows");
    }

    // within each group, rows sorted by closeness to the group medoid
    std::vector<std::vector<Eigen::Index>> ranked;
    for (const auto* members : ordered) {
        Eigen::Index medoid = (*members)[0];
        double best_total = std::numeric_limits<double>::infinity();
        for (const auto candidate : *members) {
            double total = 0.0;
            for (const auto r : *members) {
                total += euclidean_distance(features.row(candidate), features.row(r));
            }
            if (total < best_total) {
                best_total = total;
                medoid = candidate;
            }
        }
        std::vector<std::pair<double, Eigen::Index>> by_centrality;
        for (const auto r : *members) {
            by_centrality.emplace_back(euclidean_distance(features.row(r), features.row(medoid)),
                                       r);
        }
        std::sort(by_centrality.begin(), by_centrality.end());
        std::vector<Eigen::Index> rows;
        rows.reserve(by_centrality.size());
        for (const auto& [dist, r] : by_centrality) rows.push_back(r);
        ranked.push_back(std::move(rows));
    }

    // one row per group per pass, most central first
    std::vector<Eigen::Index> test;
    for (std::size_t pass = 0; static_cast<Eigen::Index>(test.size()) < n_test; ++pass) {
        for (const auto& rows : ranked) {
            if (static_cast<Eigen::Index>(test.size()) >= n_test) break;
            if (pass < rows.size()) test.push_back(rows[pass]);
        }
    }
    return test;
}

std::vector<Eigen::Index> maximin_select(const Eigen::MatrixXd& features,
                                         std::vector<Eigen::Index> pool,
                                         std::vector<Eigen::Index> selected, Eigen::Index k,
                                         const SelectionCost& cost) {
    if (k > static_cast<Eigen::Index>(pool.size())) {
        throw ValidationError("cannot select " + std::to_string(k) + " rows from a pool of " +
                              std::to_string(pool.size()));
    }
    std::sort(pool.begin(), pool.end()); // lowest-index tie-breaking

    std::vector<Eigen::Index> picks;
    picks.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index step = 0; step < k; ++step) {
        std::size_t best_pos = 0;
        double best_cost = -std::numeric_limits<double>::infinity();
        for (std::size_t pos = 0; pos < pool.size(); ++pos) {
            const double c = cost(features, pool[pos], selected);
            if (c > best_cost) {
                best_cost = c;
                best_pos = pos;
            }
        }
        const Eigen::Index pick = pool[best_pos];
        picks.push_back(pick);
        selected.push_back(pick);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    return picks;
}

SplitResult split(const EncodedDataset& dataset, const RowGroups& groups,
                  const SplitConfig& config) {
    const Eigen::Index n = dataset.features.rows();
    validate_config(config, n);

    std::mt19937_64 rng(config.seed);

    SplitResult result;
    result.test = config.test_indices
                      ? validated_test_indices(config, n)
                      : representative_test_rows(dataset.features, groups,
                                                 config.small_group_threshold, config.n_test);
    const auto remaining = difference(all_rows(n), result.test);

    const auto filtered = small_group_filter(restrict_groups(groups, remaining),
                                             config.small_group_threshold);
    if (static_cast<Eigen::Index>(filtered.eligible_pool.size()) < config.n_validation) {
        throw ValidationError("eligible pool (" + std::to_string(filtered.eligible_pool.size()) +
                              " rows after the small-group filter) is smaller than the requested "
                              "validation size (" +
                              std::to_string(config.n_validation) + ")");
    }

    if (config.n_validation > 0) {
        const Eigen::Index anchor =
            select_initial(dataset.features, filtered.eligible_pool, config.n_initial, rng);
        result.validation = sorted(maximin_select(dataset.features, filtered.eligible_pool,
                                                  {anchor}, config.n_validation));
    }
    result.test = sorted(result.test);
    result.train = difference(remaining, result.validation);

    check_partition(result, n);
    return result;
}

SplitResult split_random(Eigen::Index n_rows, const SplitConfig& config) {
    validate_config(config, n_rows);
    std::mt19937_64 rng(config.seed);

    auto rows = all_rows(n_rows);
    // Fisher-Yates with the portable bounded draw
    for (std::size_t i = rows.size(); i > 1; --i) {
        const std::uint64_t j = bounded_uniform(rng, i);
        std::swap(rows[i - 1], rows[j]);
    }

    SplitResult result;
    auto it = rows.begin();
    if (config.test_indices) {
        result.test = sorted(*config.test_indices);
        rows = difference(rows, result.test);
        it = rows.begin();
    } else {
        result.test.assign(it, it + config.n_test);
        it += config.n_test;
    }
    result.validation.assign(it, it + config.n_validation);
    it += config.n_validation;
    result.train.assign(it, rows.end());

    result.train = sorted(result.train);
    result.validation = sorted(result.validation);
    result.test = sorted(result.test);
    check_partition(result, n_rows);
    return result;
}

SplitResult split_maximin(const EncodedDataset& dataset, const SplitConfig& config) {
    const Eigen::Index n = dataset.features.rows();
    validate_config(config, n);

    std::mt19937_64 rng(config.seed);

    SplitResult result;
    if (config.test_indices) {
        result.test = validated_test_indices(config, n);
    } else if (config.n_test > 0) {
        const auto pool = all_rows(n);
        const Eigen::Index anchor = select_initial(dataset.features, pool, config.n_initial, rng);
        result.test = maximin_select(dataset.features, pool, {anchor}, config.n_test);
    }
    const auto remaining = difference(all_rows(n), result.test);

    if (config.n_validation > 0) {
        const Eigen::Index anchor =
            select_initial(dataset.features, remaining, config.n_initial, rng);
        result.validation =
            sorted(maximin_select(dataset.features, remaining, {anchor}, config.n_validation));
    }
    result.test = sorted(result.test);
    result.train = difference(remaining, result.validation);

    check_partition(result, n);
    return result;
}

void check_partition(const SplitResult& result, Eigen::Index n_rows) {
    std::vector<Eigen::Index> all;
    all.insert(all.end(), result.train.begin(), result.train.end());
    all.insert(all.end(), result.validation.begin(), result.validation.end());
    all.insert(all.end(), result.test.begin(), result.test.end());
    if (static_cast<Eigen::Index>(all.size()) != n_rows) {
        throw ValidationError("split covers " + std::to_string(all.size()) + " rows, expected " +
                              std::to_string(n_rows));
    }
    std::sort(all.begin(), all.end());
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        if (all[static_cast<std::size_t>(i)] != i) {
            throw ValidationError("split is not a partition: row " + std::to_string(i) +
                                  " is missing or repeated");
        }
    }
}

namespace {

std::string join_indices(const std::vector<Eigen::Index>& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(rows[i]);
    }
    return out;
}

std::vector<Eigen::Index> parse_indices(std::string_view text, const std::string& where) {
    std::vector<Eigen::Index> rows;
    for (const auto& field : csv::split_line(text)) {
        if (field.empty()) continue;
        rows.push_back(static_cast<Eigen::Index>(csv::parse_double(field, where)));
    }
    return rows;
}

} // namespace

std::string serialize_split(const SplitResult& result) {
    return "train: " + join_indices(result.train) + "\nvalidation: " +
           join_indices(result.validation) + "\ntest: " + join_indices(result.test) + "\n";
}

SplitResult parse_split(std::string_view text) {
    SplitResult result;
    bool train = false, validation = false, test = false;
    for (const auto& line : csv::split_lines(text)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("split file line without a ':' label");
        const std::string label = line.substr(0, colon);
        std::string_view rest = std::string_view(line).substr(colon + 1);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        if (label == "train") {
            result.train = parse_indices(rest, "split train indices");
            train = true;
        } else if (label == "validation") {
            result.validation = parse_indices(rest, "split validation indices");
            validation = true;
        } else if (label == "test") {
            result.test = parse_indices(rest, "split test indices");
            test = true;
        } else {
            throw ParseError("unknown split file label '" + label + "'");
        }
    }
    if (!train || !validation || !test) {
        throw ParseError("split file must contain train:, validation: and test: lines");
    }
    return result;
}

} // namespace odt

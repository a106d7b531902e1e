#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ffhr/data.hpp"
#include "ffhr/model.hpp"

namespace ffhr {

/// Filtered-ranking metrics over a pool of queries.
struct RankingReport {
    double mrr = 0.0;
    std::map<int, double> hits;  // K in {1, 3, 10}
    std::size_t n_queries = 0;
};

/// Rank of the true entity among candidates: one plus the number of
/// competitors scoring >= the true score (pessimistic ties), where other
/// known-true entities from the filter do not compete.
/// `filter` must contain `true_entity` (it is a known-true triple).
std::size_t filtered_rank(std::span<const double> scores, std::size_t true_entity,
                          std::span<const std::uint32_t> filter);

/// Both-direction filtered evaluation: each (h, r, t) contributes a tail
/// query under r and a head query under the reciprocal of r.
RankingReport evaluate_split(const Scorer& scorer, const TripleStore& store, Split split,
                             const FilterIndex& filter);

/// Krackhardt hierarchy score of a directed graph given as (head, tail)
/// pairs: the fraction of ordered reachable pairs (u, v), u != v, for which
/// v does not reach back to u. 1 on trees, 0 on symmetric graphs.
double khs(std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

/// Cardinality category per base relation ("1-1", "1-N", "N-1", "N-N") from
/// average tails-per-head and heads-per-tail on the train split; relations
/// without train triples fall back to all-split statistics and are counted in
/// `fallback_relations`.
std::vector<std::string> relation_categories(const TripleStore& store, double threshold = 1.5,
                                             std::vector<std::string>* fallback_relations = nullptr);

struct PerRelationRow {
    std::string name;
    double hits10 = 0.0;
    double khs = 0.0;
    std::string category;
    std::size_t n_queries = 0;
};

struct CategoryCell {
    double mrr = 0.0;
    double hits10 = 0.0;
    std::size_t n_queries = 0;
};

/// Per-relation and per-category breakdowns in the style of the relation
/// analysis tables. Category cells are split by query direction.
struct RelationBreakdown {
    std::vector<PerRelationRow> relations;
    std::map<std::string, std::array<CategoryCell, 2>> categories;  // [head-dir, tail-dir]
};

RelationBreakdown relation_breakdown(const Scorer& scorer, const TripleStore& store, Split split,
                                     const FilterIndex& filter, double category_threshold = 1.5);

/// Serializes a report (and optional breakdown) as a JSON document.
std::string report_to_json(const RankingReport& report, const RelationBreakdown* breakdown);

/// Plain-text summary table.
void print_report(std::ostream& os, const RankingReport& report,
                  const RelationBreakdown* breakdown);

}  // namespace ffhr

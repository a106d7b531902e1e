#include "ffhr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace ffhr {

std::size_t filtered_rank(std::span<const double> scores, std::size_t true_entity,
                          std::span<const std::uint32_t> filter) {
    if (true_entity >= scores.size())
        throw std::out_of_range("filtered_rank: true entity not scored");
    if (!std::binary_search(filter.begin(), filter.end(),
                            static_cast<std::uint32_t>(true_entity)))
        throw std::invalid_argument("filtered_rank: true entity missing from filter");

    const double s_true = scores[true_entity];
    std::size_t rank = 1;
    for (std::size_t e = 0; e < scores.size(); ++e) {
        if (e == true_entity) continue;
        if (scores[e] < s_true) continue;
        if (std::binary_search(filter.begin(), filter.end(), static_cast<std::uint32_t>(e)))
            continue;  // other known-true entities do not compete
        ++rank;
    }
    return rank;
}

namespace {

struct QueryOutcome {
    std::size_t rank;
    bool head_direction;
    std::uint32_t base_relation;
};

void accumulate(RankingReport& report, std::span<const std::size_t> ranks) {
    report.n_queries = ranks.size();
    report.hits = {{1, 0.0}, {3, 0.0}, {10, 0.0}};
    if (ranks.empty()) return;
    double mrr = 0.0;
    std::map<int, std::size_t> hit_counts{{1, 0}, {3, 0}, {10, 0}};
    for (std::size_t r : ranks) {
        mrr += 1.0 / static_cast<double>(r);
        for (auto& [k, n] : hit_counts)
            if (r <= static_cast<std::size_t>(k)) ++n;
    }
    report.mrr = mrr / static_cast<double>(ranks.size());
    for (const auto& [k, n] : hit_counts)
        report.hits[k] = static_cast<double>(n) / static_cast<double>(ranks.size());
}

std::vector<QueryOutcome> rank_split(const Scorer& scorer, const TripleStore& store, Split split,
                                     const FilterIndex& filter) {
    if (!store.augmented)
        throw std::invalid_argument("evaluate_split: store must carry reciprocal relations");
    const auto& triples = store.split(split);
    if (triples.empty()) throw std::invalid_argument("evaluate_split: empty split");
    const auto base = static_cast<std::uint32_t>(store.num_base_relations);

    std::vector<QueryOutcome> out;
    out.reserve(2 * triples.size());
    std::vector<double> scores(scorer.num_entities());
    for (const Triple& tr : triples) {
        const std::uint32_t base_rel = tr.r < base ? tr.r : tr.r - base;
        // Tail query (h, r, ?).
        scorer.score_tails(tr.h, tr.r, scores);
        out.push_back({filtered_rank(scores, tr.t, filter.known_tails(tr.h, tr.r)), false,
                       base_rel});
        // Head query (?, r, t) as a tail query under the reciprocal relation.
        const std::uint32_t rec = tr.r < base ? tr.r + base : tr.r - base;
        scorer.score_tails(tr.t, rec, scores);
        out.push_back({filtered_rank(scores, tr.h, filter.known_tails(tr.t, rec)), true, base_rel});
    }
    return out;
}

}  // namespace

RankingReport evaluate_split(const Scorer& scorer, const TripleStore& store, Split split,
                             const FilterIndex& filter) {
    const auto outcomes = rank_split(scorer, store, split, filter);
    std::vector<std::size_t> ranks;
    ranks.reserve(outcomes.size());
    for (const auto& q : outcomes) ranks.push_back(q.rank);
    RankingReport report;
    accumulate(report, ranks);
    return report;
}

double khs(std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
    if (edges.empty()) throw std::invalid_argument("khs: empty relation graph");

    std::set<std::uint32_t> node_set;
    for (const auto& [h, t] : edges) {
        node_set.insert(h);
        node_set.insert(t);
    }
    std::vector<std::uint32_t> nodes(node_set.begin(), node_set.end());
    std::unordered_map<std::uint32_t, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;

    std::vector<std::vector<std::size_t>> succ(nodes.size());
    for (const auto& [h, t] : edges) succ[index[h]].push_back(index[t]);

    // Transitive closure by breadth-first search from every node. Reachability
    // here means "via at least one edge", so reach[s][s] holds only on cycles.
    std::vector<std::vector<bool>> reach(nodes.size(), std::vector<bool>(nodes.size(), false));
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        auto& r = reach[s];
        std::deque<std::size_t> queue;
        for (std::size_t v : succ[s]) {
            if (!r[v]) {
                r[v] = true;
                queue.push_back(v);
            }
        }
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : succ[u]) {
                if (!r[v]) {
                    r[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }

    std::size_t reachable_pairs = 0;
    std::size_t one_way = 0;
    for (std::size_t u = 0; u < nodes.size(); ++u) {
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            if (u == v || !reach[u][v]) continue;
            ++reachable_pairs;
            if (!reach[v][u]) ++one_way;
        }
    }
    if (reachable_pairs == 0) return 1.0;  // isolated self-loops only
    return static_cast<double>(one_way) / static_cast<double>(reachable_pairs);
}

std::vector<std::string> relation_categories(const TripleStore& store, double threshold,
                                             std::vector<std::string>* fallback_relations) {
    const std::size_t base = store.augmented ? store.num_base_relations : store.num_relations();
    if (base == 0) throw std::invalid_argument("relation_categories: no relations");

    auto stats_for = [&](std::uint32_t r, bool all_splits) {
        std::unordered_map<std::uint32_t, std::unordered_set<std::uint32_t>> tails_of_head;
        std::unordered_map<std::uint32_t, std::unordered_set<std::uint32_t>> heads_of_tail;
        auto scan = [&](const std::vector<Triple>& triples) {
            for (const Triple& tr : triples) {
                if (tr.r != r) continue;
                tails_of_head[tr.h].insert(tr.t);
                heads_of_tail[tr.t].insert(tr.h);
            }
        };
        scan(store.train);
        if (all_splits) {
            scan(store.valid);
            scan(store.test);
        }
        return std::pair{tails_of_head, heads_of_tail};
    };

    std::vector<std::string> out(base);
    for (std::uint32_t r = 0; r < base; ++r) {
        auto [th, ht] = stats_for(r, false);
        if (th.empty()) {
            if (fallback_relations) fallback_relations->push_back(store.relations.name(r));
            std::tie(th, ht) = stats_for(r, true);
            if (th.empty()) {
                out[r] = "1-1";  // relation never instantiated anywhere
                continue;
            }
        }
        double pairs = 0.0;
        for (const auto& [h, tails] : th) pairs += static_cast<double>(tails.size());
        const double tails_per_head = pairs / static_cast<double>(th.size());
        double pairs2 = 0.0;
        for (const auto& [t, heads] : ht) pairs2 += static_cast<double>(heads.size());
        const double heads_per_tail = pairs2 / static_cast<double>(ht.size());
        const char* head_side = heads_per_tail > threshold ? "N" : "1";
        const char* tail_side = tails_per_head > threshold ? "N" : "1";
        out[r] = std::string(head_side) + "-" + tail_side;
    }
    return out;
}

RelationBreakdown relation_breakdown(const Scorer& scorer, const TripleStore& store, Split split,
                                     const FilterIndex& filter, double category_threshold) {
    const auto outcomes = rank_split(scorer, store, split, filter);
    const auto categories = relation_categories(store, category_threshold);
    const std::size_t base = categories.size();

    RelationBreakdown bd;

    // Per-relation rows over relations that actually occur in the split.
    std::vector<std::size_t> n_queries(base, 0), hits10(base, 0);
    for (const auto& q : outcomes) {
        ++n_queries[q.base_relation];
        if (q.rank <= 10) ++hits10[q.base_relation];
    }
    for (std::uint32_t r = 0; r < base; ++r) {
        if (n_queries[r] == 0) continue;
        PerRelationRow row;
        row.name = store.relations.name(r);
        row.hits10 = static_cast<double>(hits10[r]) / static_cast<double>(n_queries[r]);
        row.category = categories[r];
        row.n_queries = n_queries[r];
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        auto collect = [&](const std::vector<Triple>& triples) {
            for (const Triple& tr : triples)
                if (tr.r == r) edges.emplace_back(tr.h, tr.t);
        };
        collect(store.train);
        collect(store.valid);
        collect(store.test);
        row.khs = khs(edges);
        bd.relations.push_back(std::move(row));
    }

    // Category cells split by query direction (0 = head queries, 1 = tail).
    struct Acc {
        double mrr = 0.0;
        std::size_t hits = 0;
        std::size_t n = 0;
    };
    std::map<std::string, std::array<Acc, 2>> acc;
    for (const auto& q : outcomes) {
        auto& cell = acc[categories[q.base_relation]][q.head_direction ? 0 : 1];
        cell.mrr += 1.0 / static_cast<double>(q.rank);
        if (q.rank <= 10) ++cell.hits;
        ++cell.n;
    }
    for (const auto& [cat, cells] : acc) {
        for (int dir = 0; dir < 2; ++dir) {
            CategoryCell out;
            out.n_queries = cells[dir].n;
            if (cells[dir].n > 0) {
                out.mrr = cells[dir].mrr / static_cast<double>(cells[dir].n);
                out.hits10 =
                    static_cast<double>(cells[dir].hits) / static_cast<double>(cells[dir].n);
            }
            bd.categories[cat][dir] = out;
        }
    }
    return bd;
}

std::string report_to_json(const RankingReport& report, const RelationBreakdown* breakdown) {
    nlohmann::json j;
    j["metrics"]["mrr"] = report.mrr;
    for (const auto& [k, v] : report.hits) j["metrics"]["hits@" + std::to_string(k)] = v;
    j["metrics"]["n_queries"] = report.n_queries;
    if (breakdown) {
        j["relations"] = nlohmann::json::array();
        for (const auto& row : breakdown->relations) {
            j["relations"].push_back({{"name", row.name},
                                      {"hits@10", row.hits10},
                                      {"khs", row.khs},
                                      {"category", row.category},
                                      {"n_queries", row.n_queries}});
        }
        for (const auto& [cat, cells] : breakdown->categories) {
            for (int dir = 0; dir < 2; ++dir) {
                auto& cell = j["categories"][cat][dir == 0 ? "head" : "tail"];
                cell["mrr"] = cells[dir].mrr;
                cell["hits@10"] = cells[dir].hits10;
                cell["n_queries"] = cells[dir].n_queries;
            }
        }
    }
    return j.dump(2);
}

void print_report(std::ostream& os, const RankingReport& report,
                  const RelationBreakdown* breakdown) {
    os << std::fixed << std::setprecision(4);
    os << "queries " << report.n_queries << "  MRR " << report.mrr;
    for (const auto& [k, v] : report.hits) os << "  H@" << k << " " << v;
    os << "\n";
    if (!breakdown) return;
    os << "\nrelation                         cat   H@10   Khs    queries\n";
    for (const auto& row : breakdown->relations) {
        os << std::left << std::setw(32) << row.name.substr(0, 31) << " " << std::setw(5)
           << row.category << std::right << std::setw(6) << row.hits10 << " " << std::setw(6)
           << row.khs << " " << std::setw(9) << row.n_queries << "\n";
    }
    os << "\ncategory  direction   MRR     H@10    queries\n";
    for (const auto& [cat, cells] : breakdown->categories) {
        for (int dir = 0; dir < 2; ++dir) {
            os << std::left << std::setw(9) << cat << " " << std::setw(10)
               << (dir == 0 ? "head" : "tail") << std::right << std::setw(7) << cells[dir].mrr
               << " " << std::setw(7) << cells[dir].hits10 << " " << std::setw(8)
               << cells[dir].n_queries << "\n";
        }
    }
}

}  // namespace ffhr

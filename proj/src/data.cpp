#include "ffhr/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace ffhr {

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    throw std::invalid_argument("to_string: bad Split");
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "valid") return Split::valid;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split: " + s);
}

std::uint32_t Vocab::get_or_add(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
}

std::uint32_t Vocab::id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw std::out_of_range("unknown vocab entry: " + name);
    return it->second;
}

const std::string& Vocab::name(std::uint32_t id) const {
    if (id >= names_.size()) throw std::out_of_range("vocab id out of range");
    return names_[id];
}

bool Vocab::contains(const std::string& name) const { return ids_.count(name) > 0; }

std::uint64_t Vocab::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (const auto& n : names_) {
        for (char ch : n) mix(static_cast<unsigned char>(ch));
        mix(0);
    }
    return h;
}

const std::vector<Triple>& TripleStore::split(Split s) const {
    switch (s) {
        case Split::train: return train;
        case Split::valid: return valid;
        case Split::test: return test;
    }
    throw std::invalid_argument("split: bad Split");
}

std::vector<Triple>& TripleStore::split(Split s) {
    return const_cast<std::vector<Triple>&>(static_cast<const TripleStore&>(*this).split(s));
}

void load_tsv_into(TripleStore& store, const std::filesystem::path& path, Split split) {
    if (store.augmented) throw std::invalid_argument("load_tsv_into: store already augmented");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    auto& triples = store.split(split);
    std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> seen;
    for (const Triple& t : triples) seen.emplace(t.h, t.r, t.t);

    std::string line;
    std::size_t lineno = 0;
    std::size_t added = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos ||
            line.find('\t', tab2 + 1) != std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 3 tab-separated fields");
        }
        Triple t;
        t.h = store.entities.get_or_add(line.substr(0, tab1));
        t.r = store.relations.get_or_add(line.substr(tab1 + 1, tab2 - tab1 - 1));
        t.t = store.entities.get_or_add(line.substr(tab2 + 1));
        if (!seen.emplace(t.h, t.r, t.t).second) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": duplicate triple within split");
        }
        triples.push_back(t);
        ++added;
    }
    if (added == 0) throw std::runtime_error(path.string() + ": no triples");
    store.num_base_relations = store.relations.size();
}

TripleStore load_tsv(const std::filesystem::path& path) {
    TripleStore store;
    load_tsv_into(store, path, Split::train);
    return store;
}

TripleStore load_dataset(const std::filesystem::path& dir) {
    TripleStore store;
    load_tsv_into(store, dir / "train.txt", Split::train);
    load_tsv_into(store, dir / "valid.txt", Split::valid);
    load_tsv_into(store, dir / "test.txt", Split::test);
    return store;
}

void write_dataset(const TripleStore& store, const std::filesystem::path& dir) {
    if (store.augmented) throw std::invalid_argument("write_dataset: strip reciprocal relations first");
    std::filesystem::create_directories(dir);
    for (Split s : {Split::train, Split::valid, Split::test}) {
        const auto path = dir / (to_string(s) + ".txt");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        for (const Triple& t : store.split(s)) {
            out << store.entities.name(t.h) << '\t' << store.relations.name(t.r) << '\t'
                << store.entities.name(t.t) << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }
}

TripleStore augment_reciprocal(const TripleStore& store) {
    if (store.augmented) throw std::invalid_argument("augment_reciprocal: already augmented");
    TripleStore out = store;
    const auto base = static_cast<std::uint32_t>(store.relations.size());
    for (std::uint32_t r = 0; r < base; ++r) {
        out.relations.get_or_add(store.relations.name(r) + "_reciprocal");
    }
    out.train.reserve(store.train.size() * 2);
    for (const Triple& t : store.train) {
        out.train.push_back({t.t, t.r + base, t.h});
    }
    out.num_base_relations = base;
    out.augmented = true;
    return out;
}

TripleStore strip_reciprocal(const TripleStore& store) {
    if (!store.augmented) throw std::invalid_argument("strip_reciprocal: store not augmented");
    const auto base = static_cast<std::uint32_t>(store.num_base_relations);
    TripleStore out;
    out.entities = store.entities;
    for (std::uint32_t r = 0; r < base; ++r) out.relations.get_or_add(store.relations.name(r));
    for (const Triple& t : store.train) {
        if (t.r < base) out.train.push_back(t);
    }
    out.valid = store.valid;
    out.test = store.test;
    out.num_base_relations = base;
    out.augmented = false;
    return out;
}

namespace {

std::uint64_t filter_key(std::uint32_t h, std::uint32_t r) {
    return (static_cast<std::uint64_t>(h) << 32) | r;
}

}  // namespace

FilterIndex::FilterIndex(const TripleStore& store) {
    if (!store.augmented) throw std::invalid_argument("FilterIndex: store must be augmented");
    const auto base = static_cast<std::uint32_t>(store.num_base_relations);
    auto insert = [this](std::uint32_t h, std::uint32_t r, std::uint32_t t) {
        map_[filter_key(h, r)].push_back(t);
    };
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Triple& t : store.split(s)) {
            insert(t.h, t.r, t.t);
            // mirror under the reciprocal relation so head queries filter too
            if (t.r < base) {
                insert(t.t, t.r + base, t.h);
            } else {
                insert(t.t, t.r - base, t.h);
            }
        }
    }
    for (auto& [key, tails] : map_) {
        std::sort(tails.begin(), tails.end());
        tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
    }
}

std::span<const std::uint32_t> FilterIndex::known_tails(std::uint32_t h, std::uint32_t r) const {
    auto it = map_.find(filter_key(h, r));
    if (it == map_.end()) return {};
    return it->second;
}

bool FilterIndex::contains(std::uint32_t h, std::uint32_t r, std::uint32_t t) const {
    auto tails = known_tails(h, r);
    return std::binary_search(tails.begin(), tails.end(), t);
}

Adjacency build_adjacency(const TripleStore& store) {
    Adjacency adj;
    adj.out.resize(store.num_entities());
    for (const Triple& t : store.train) {
        adj.out[t.h].push_back({t.r, t.t});
    }
    return adj;
}

TripleStore generate_synthetic_tree(int depth, int branching, std::uint64_t seed) {
    if (depth < 2) throw std::invalid_argument("generate_synthetic_tree: depth must be >= 2");
    if (branching < 2) throw std::invalid_argument("generate_synthetic_tree: branching must be >= 2");

    std::size_t num_entities = 0;
    std::size_t level_size = 1;
    for (int d = 0; d < depth; ++d) {
        num_entities += level_size;
        level_size *= static_cast<std::size_t>(branching);
    }

    TripleStore store;
    for (std::size_t i = 0; i < num_entities; ++i) store.entities.get_or_add("e" + std::to_string(i));
    const std::uint32_t child_of = store.relations.get_or_add("child_of");
    store.num_base_relations = 1;

    // breadth-first labels: entity i's parent is (i-1)/branching
    std::vector<Triple> edges;
    for (std::size_t i = 1; i < num_entities; ++i) {
        edges.push_back({static_cast<std::uint32_t>(i), child_of,
                         static_cast<std::uint32_t>((i - 1) / static_cast<std::size_t>(branching))});
    }

    const std::size_t n_valid = edges.size() / 10;
    const std::size_t n_test = edges.size() / 10;

    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    // count train-incident edges per entity; moving an edge out of train is
    // allowed only while both endpoints keep at least one train edge
    std::vector<std::size_t> incident(num_entities, 0);
    for (const Triple& e : edges) {
        ++incident[e.h];
        ++incident[e.t];
    }
    std::vector<bool> held_out(edges.size(), false);
    std::size_t moved_valid = 0, moved_test = 0;
    for (std::size_t idx : order) {
        if (moved_valid + moved_test == n_valid + n_test) break;
        const Triple& e = edges[idx];
        if (incident[e.h] < 2 || incident[e.t] < 2) continue;
        --incident[e.h];
        --incident[e.t];
        held_out[idx] = true;
        if (moved_valid < n_valid) {
            ++moved_valid;
            store.valid.push_back(e);
        } else {
            ++moved_test;
            store.test.push_back(e);
        }
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!held_out[i]) store.train.push_back(edges[i]);
    }
    return store;
}

}  // namespace ffhr

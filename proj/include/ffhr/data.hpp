#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ffhr {

struct Triple {
    std::uint32_t h = 0;
    std::uint32_t r = 0;
    std::uint32_t t = 0;

    friend bool operator==(const Triple& a, const Triple& b) {
        return a.h == b.h && a.r == b.r && a.t == b.t;
    }
};

enum class Split { train, valid, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// String <-> id bijection; ids assigned by first appearance.
class Vocab {
public:
    std::uint32_t get_or_add(const std::string& name);
    /// Throws std::out_of_range for unknown names/ids.
    std::uint32_t id(const std::string& name) const;
    const std::string& name(std::uint32_t id) const;
    bool contains(const std::string& name) const;
    std::size_t size() const { return names_.size(); }

    /// FNV-1a over all names in id order; used to detect checkpoint/dataset drift.
    std::uint64_t content_hash() const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Integer-encoded triples for the three standard splits, sharing vocabularies.
struct TripleStore {
    Vocab entities;
    Vocab relations;
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
    /// Relation count before reciprocal augmentation; equals relations.size()
    /// until augment_reciprocal doubles the vocabulary.
    std::size_t num_base_relations = 0;
    bool augmented = false;

    const std::vector<Triple>& split(Split s) const;
    std::vector<Triple>& split(Split s);
    std::size_t num_entities() const { return entities.size(); }
    std::size_t num_relations() const { return relations.size(); }
};

/// Parses one head<TAB>relation<TAB>tail file into the given split, growing
/// the store's vocabularies. Errors carry the file path and line number.
void load_tsv_into(TripleStore& store, const std::filesystem::path& path, Split split);

/// Single-file convenience: the file becomes the train split.
TripleStore load_tsv(const std::filesystem::path& path);

/// Loads dir/train.txt, dir/valid.txt, dir/test.txt (in that order, so vocab
/// ids follow first appearance across the whole dataset).
TripleStore load_dataset(const std::filesystem::path& dir);

/// Writes train.txt/valid.txt/test.txt under dir. Requires an unaugmented store.
void write_dataset(const TripleStore& store, const std::filesystem::path& dir);

/// For every train triple (h, r, t) appends (t, r + |R|, h) with a fresh
/// reciprocal relation id; the relation vocabulary doubles. Valid/test triples
/// are left as stored; head queries are evaluated under the reciprocal ids.
TripleStore augment_reciprocal(const TripleStore& store);

/// Inverse of augment_reciprocal.
TripleStore strip_reciprocal(const TripleStore& store);

/// Known-true tails per (head, relation) across all splits, both query
/// directions. Requires an augmented store.
class FilterIndex {
public:
    explicit FilterIndex(const TripleStore& store);

    /// Sorted ids; empty span on lookup miss.
    std::span<const std::uint32_t> known_tails(std::uint32_t h, std::uint32_t r) const;
    bool contains(std::uint32_t h, std::uint32_t r, std::uint32_t t) const;

private:
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> map_;
};

/// Outgoing train edges per entity, in input order. Built from the train
/// split only.
struct Adjacency {
    struct Edge {
        std::uint32_t relation;
        std::uint32_t neighbor;
    };
    std::vector<std::vector<Edge>> out;

    std::size_t num_entities() const { return out.size(); }
};

Adjacency build_adjacency(const TripleStore& store);

/// Complete tree with `depth` levels and fan-out `branching`; edges run
/// child -> parent under a single "child_of" relation. Edges are split
/// 80/10/10 at random under the seed, keeping every entity incident to at
/// least one train edge.
TripleStore generate_synthetic_tree(int depth, int branching, std::uint64_t seed);

}  // namespace ffhr

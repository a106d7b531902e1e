#include "ffhr/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ffhr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

double parse_double(const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& v) {
    std::size_t used = 0;
    unsigned long long out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
    }
    if (used != v.size() || (!v.empty() && v[0] == '-'))
        throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
    return out;
}

int parse_int(const std::string& v) {
    std::size_t used = 0;
    int out = 0;
    try {
        out = std::stoi(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw std::invalid_argument("expected an integer, got '" + v + "'");
    return out;
}

std::string format_double(double v) {
    std::ostringstream oss;
    oss.precision(17);
    oss << v;
    return oss.str();
}

struct KeyDef {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, KeyDef>>& registry() {
    auto str_key = [](std::string RunConfig::* field) {
        return KeyDef{[field](RunConfig& c, const std::string& v) { c.*field = v; },
                      [field](const RunConfig& c) { return c.*field; }};
    };
    auto bool_key = [](bool RunConfig::* field) {
        return KeyDef{[field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
                      [field](const RunConfig& c) { return (c.*field) ? "true" : "false"; }};
    };
    auto double_key = [](double RunConfig::* field) {
        return KeyDef{[field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); },
                      [field](const RunConfig& c) { return format_double(c.*field); }};
    };
    auto size_key = [](std::size_t RunConfig::* field) {
        return KeyDef{[field](RunConfig& c, const std::string& v) {
                          c.*field = static_cast<std::size_t>(parse_u64(v));
                      },
                      [field](const RunConfig& c) { return std::to_string(c.*field); }};
    };
    auto int_key = [](int RunConfig::* field) {
        return KeyDef{[field](RunConfig& c, const std::string& v) { c.*field = parse_int(v); },
                      [field](const RunConfig& c) { return std::to_string(c.*field); }};
    };

    static const std::vector<std::pair<std::string, KeyDef>> defs = [&] {
        std::vector<std::pair<std::string, KeyDef>> d;
        d.emplace_back("data_dir", str_key(&RunConfig::data_dir));
        d.emplace_back("output_dir", str_key(&RunConfig::output_dir));
        d.emplace_back("variant",
                       KeyDef{[](RunConfig& c, const std::string& v) {
                                  c.variant = v;
                                  c.transform_kind();  // validates the name
                              },
                              [](const RunConfig& c) { return c.variant; }});
        d.emplace_back("score",
                       KeyDef{[](RunConfig& c, const std::string& v) {
                                  if (v != "auto") score_kind_from_string(v);
                                  c.score = v;
                              },
                              [](const RunConfig& c) { return to_string(c.score_kind()); }});
        d.emplace_back("dim", size_key(&RunConfig::dim));
        d.emplace_back("space",
                       KeyDef{[](RunConfig& c, const std::string& v) {
                                  space_from_string(v);
                                  c.space = v;
                              },
                              [](const RunConfig& c) { return c.space; }});
        d.emplace_back("use_gcn", bool_key(&RunConfig::use_gcn));
        d.emplace_back("encoder_impl",
                       KeyDef{[](RunConfig& c, const std::string& v) {
                                  encoder_impl_from_string(v);
                                  c.encoder_impl = v;
                              },
                              [](const RunConfig& c) { return c.encoder_impl; }});
        d.emplace_back("layers", int_key(&RunConfig::layers));
        d.emplace_back("heads", int_key(&RunConfig::heads));
        d.emplace_back("activation_slope", double_key(&RunConfig::activation_slope));
        d.emplace_back("self_loops", bool_key(&RunConfig::self_loops));
        d.emplace_back("curvature", double_key(&RunConfig::curvature));
        d.emplace_back("trainable_curvature", bool_key(&RunConfig::trainable_curvature));
        d.emplace_back("batch_size", size_key(&RunConfig::batch_size));
        d.emplace_back("learning_rate", double_key(&RunConfig::learning_rate));
        d.emplace_back("reg_coeff", double_key(&RunConfig::reg_coeff));
        d.emplace_back("max_epochs", size_key(&RunConfig::max_epochs));
        d.emplace_back("patience", size_key(&RunConfig::patience));
        d.emplace_back("eval_every", size_key(&RunConfig::eval_every));
        d.emplace_back("seed", KeyDef{[](RunConfig& c, const std::string& v) {
                                          c.seed = parse_u64(v);
                                      },
                                      [](const RunConfig& c) { return std::to_string(c.seed); }});
        d.emplace_back("deterministic", bool_key(&RunConfig::deterministic));
        d.emplace_back("threads", int_key(&RunConfig::threads));
        d.emplace_back("check_manifold", bool_key(&RunConfig::check_manifold));
        return d;
    }();
    return defs;
}

const KeyDef& find_key(const std::string& key) {
    for (const auto& [name, def] : registry())
        if (name == key) return def;
    throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

TransformKind RunConfig::transform_kind() const {
    if (variant == "distmult") return TransformKind::diagonal;
    if (variant == "complex") return TransformKind::block2_rotation_scale;
    if (variant == "rescal") return TransformKind::full;
    if (variant == "duale") return TransformKind::block2_general;
    throw std::invalid_argument("unknown variant '" + variant +
                                "' (expected distmult, complex, rescal, or duale)");
}

ScoreKind RunConfig::score_kind() const {
    if (score == "auto")
        return space_from_string(space) == Space::hyperbolic ? ScoreKind::hin
                                                             : ScoreKind::euclidean_inner;
    return score_kind_from_string(score);
}

ModelConfig RunConfig::model_config() const {
    ModelConfig mc;
    mc.dim = dim;
    mc.score = score_kind();
    mc.transform = transform_kind();
    mc.use_gcn = use_gcn;
    mc.encoder.num_layers = layers;
    mc.encoder.num_heads = heads;
    mc.encoder.activation_slope = activation_slope;
    mc.encoder.space = space_from_string(space);
    mc.encoder.impl = encoder_impl_from_string(encoder_impl);
    mc.encoder.self_loops = self_loops;
    mc.curvature = curvature;
    mc.trainable_curvature = trainable_curvature;
    return mc;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig tc;
    tc.batch_size = batch_size;
    tc.learning_rate = learning_rate;
    tc.reg_coeff = reg_coeff;
    tc.max_epochs = max_epochs;
    tc.patience = patience;
    tc.eval_every = eval_every;
    tc.seed = seed;
    tc.deterministic = deterministic;
    tc.threads = threads;
    tc.check_manifold = check_manifold;
    return tc;
}

void RunConfig::validate() const {
    model_config().validate();
    train_config().validate();
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [name, def] : registry()) keys.push_back(name);
    return keys;
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    try {
        find_key(key).set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

std::string get_config_key(const RunConfig& cfg, const std::string& key) {
    return find_key(key).get(cfg);
}

RunConfig parse_config_text(const std::string& text, std::vector<std::string>* keys_seen) {
    RunConfig cfg;
    std::istringstream iss(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> seen;
    while (std::getline(iss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        seen.push_back(key);
        try {
            set_config_key(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (keys_seen) *keys_seen = std::move(seen);
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, std::vector<std::string>* keys_seen) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    try {
        return parse_config_text(buf.str(), keys_seen);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override '" + ov + "': expected key=value");
        set_config_key(cfg, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
}

std::string to_config_text(const RunConfig& cfg) {
    std::ostringstream oss;
    for (const auto& [name, def] : registry()) oss << name << " = " << def.get(cfg) << '\n';
    return oss.str();
}

}  // namespace ffhr

#include "ghal/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ghal {

namespace pt = boost::property_tree;

void EvalConfig::validate() const {
    if (episodes < 1) {
        throw std::invalid_argument("eval.episodes must be positive");
    }
    if (!(p_comply >= 0.0 && p_comply <= 1.0)) {
        throw std::invalid_argument("eval.p_comply must lie in [0, 1]");
    }
    if (max_steps < 1) {
        throw std::invalid_argument("eval.max_steps must be positive");
    }
}

void ExperimentConfig::validate() const {
    if (maps.empty() || systems.empty() || distances_m.empty()) {
        throw ConfigError("experiment.maps, systems and distances_m must be nonempty");
    }
    for (double d : distances_m) {
        if (!(d > 0.0)) {
            throw ConfigError("experiment.distances_m must be positive");
        }
    }
    if (trials_per_run < 1 || runs < 1) {
        throw ConfigError("experiment.trials_per_run and runs must be positive");
    }
    if (workers < 0) {
        throw ConfigError("experiment.workers must be >= 0");
    }
    try {
        trial.validate();
        mdp.validate();
        scenario.validate();
        learner.validate();
        eval.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig default_config(const std::filesystem::path& map_dir) {
    ExperimentConfig c;
    c.maps = {map_dir / "home.map", map_dir / "office.map", map_dir / "corridor.map"};
    c.systems.assign(kAllSystems.begin(), kAllSystems.end());
    c.distances_m = {4.0, 8.0, 12.0};
    c.trial.record_trace = false;
    return c;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

template <typename T>
std::string fmt_int(T v) {
    return std::to_string(v);
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto s = trim(v);
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return x;
}

template <typename T>
T to_integer(const std::string& key, const std::string& v) {
    T x{};
    const auto s = trim(v);
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    const auto s = trim(v);
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

// One config field: how to print it and how to set it from text.
struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&, const std::filesystem::path&)> set;
    bool hashed = true;
};

#define GHAL_NUM(sec, name, member)                                                                  \
    Field {                                                                                          \
        sec, #name, [](const ExperimentConfig& c) { return fmt(c.member); },                         \
            [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {            \
                c.member = to_double(sec "." #name, v);                                              \
            }                                                                                        \
    }
#define GHAL_INT(sec, name, member, type)                                                            \
    Field {                                                                                          \
        sec, #name, [](const ExperimentConfig& c) { return fmt_int(c.member); },                     \
            [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {            \
                c.member = to_integer<type>(sec "." #name, v);                                       \
            }                                                                                        \
    }
#define GHAL_BOOL(sec, name, member)                                                                 \
    Field {                                                                                          \
        sec, #name, [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }, \
            [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {            \
                c.member = to_bool(sec "." #name, v);                                                \
            }                                                                                        \
    }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = [] {
        std::vector<Field> f;
        f.push_back({"experiment", "maps",
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (const auto& m : c.maps) {
                             s += (s.empty() ? "" : ", ") + m.generic_string();
                         }
                         return s;
                     },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path& base) {
                         c.maps.clear();
                         for (const auto& m : split_list(v)) {
                             c.maps.push_back(resolve(base, m));
                         }
                     },
                     false});
        f.push_back({"experiment", "systems",
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (auto k : c.systems) {
                             s += (s.empty() ? "" : ", ") + std::string(to_string(k));
                         }
                         return s;
                     },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                         c.systems.clear();
                         for (const auto& k : split_list(v)) {
                             try {
                                 c.systems.push_back(parse_system_kind(k));
                             } catch (const std::invalid_argument& e) {
                                 throw ConfigError(std::string("experiment.systems: ") + e.what());
                             }
                         }
                     }});
        f.push_back({"experiment", "distances_m",
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (double d : c.distances_m) {
                             s += (s.empty() ? "" : ", ") + fmt(d);
                         }
                         return s;
                     },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                         c.distances_m.clear();
                         for (const auto& d : split_list(v)) {
                             c.distances_m.push_back(to_double("experiment.distances_m", d));
                         }
                     }});
        f.push_back(GHAL_INT("experiment", trials_per_run, trials_per_run, int));
        f.push_back(GHAL_INT("experiment", runs, runs, int));
        f.push_back(GHAL_INT("experiment", base_seed, base_seed, std::uint64_t));
        Field workers = GHAL_INT("experiment", workers, workers, int);
        workers.hashed = false;
        f.push_back(workers);
        f.push_back({"experiment", "policy", [](const ExperimentConfig& c) { return c.policy.generic_string(); },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path& base) {
                         const auto s = trim(v);
                         c.policy = s.empty() ? std::filesystem::path() : resolve(base, s);
                     },
                     false});

        f.push_back(GHAL_INT("trial", budget_ticks, trial.budget_ticks, int));
        f.push_back(GHAL_NUM("trial", seconds_per_tick, trial.seconds_per_tick));

        f.push_back(GHAL_NUM("detector", range_m, trial.detector.range_m));
        f.push_back(GHAL_NUM("detector", p_false_negative, trial.detector.p_false_negative));
        f.push_back(GHAL_NUM("detector", p_false_positive, trial.detector.p_false_positive));

        f.push_back(GHAL_NUM("human", p_follow, trial.human.p_follow));

        f.push_back(GHAL_BOOL("filter", enabled, trial.filter.enabled));
        f.push_back(GHAL_INT("filter", particles, trial.filter.particles, int));
        f.push_back(GHAL_NUM("filter", p_stay, trial.filter.p_stay));
        f.push_back(GHAL_NUM("filter", likelihood_base, trial.filter.likelihood_base));
        f.push_back(GHAL_NUM("filter", threshold, trial.filter.threshold));

        f.push_back(GHAL_NUM("mdp", p_comply, mdp.p_comply));
        f.push_back(GHAL_NUM("mdp", r_confirm_hit, mdp.r_confirm_hit));
        f.push_back(GHAL_NUM("mdp", r_confirm_miss, mdp.r_confirm_miss));
        f.push_back(GHAL_NUM("mdp", c_small, mdp.c_small));
        f.push_back(GHAL_NUM("mdp", c_large, mdp.c_large));
        f.push_back(GHAL_INT("mdp", max_steps, mdp.max_steps, int));

        f.push_back({"scenario", "n_clutter_wedges",
                     [](const ExperimentConfig& c) {
                         return c.scenario.n_clutter_wedges ? std::to_string(*c.scenario.n_clutter_wedges)
                                                            : std::string("random");
                     },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                         const auto s = trim(v);
                         if (s == "random" || s.empty()) {
                             c.scenario.n_clutter_wedges.reset();
                         } else {
                             c.scenario.n_clutter_wedges = to_integer<int>("scenario.n_clutter_wedges", s);
                         }
                     }});
        f.push_back({"scenario", "target_coincides_clutter",
                     [](const ExperimentConfig& c) {
                         return c.scenario.target_coincides_clutter
                                    ? std::string(*c.scenario.target_coincides_clutter ? "true" : "false")
                                    : std::string("random");
                     },
                     [](ExperimentConfig& c, const std::string& v, const std::filesystem::path&) {
                         const auto s = trim(v);
                         if (s == "random" || s.empty()) {
                             c.scenario.target_coincides_clutter.reset();
                         } else {
                             c.scenario.target_coincides_clutter = to_bool("scenario.target_coincides_clutter", s);
                         }
                     }});

        f.push_back(GHAL_NUM("learner", alpha, learner.alpha));
        f.push_back(GHAL_NUM("learner", gamma, learner.gamma));
        f.push_back(GHAL_NUM("learner", epsilon_start, learner.epsilon_start));
        f.push_back(GHAL_NUM("learner", epsilon_end, learner.epsilon_end));
        f.push_back(GHAL_INT("learner", episodes, learner.episodes, int));
        f.push_back(GHAL_INT("learner", checkpoint_every, learner.checkpoint_every, int));
        f.push_back(GHAL_INT("learner", seed, learner.seed, std::uint64_t));
        f.push_back(GHAL_BOOL("learner", mirror_updates, learner.mirror_updates));
        f.push_back(GHAL_BOOL("learner", online_updates, learner.online_updates));

        f.push_back(GHAL_INT("eval", episodes, eval.episodes, int));
        f.push_back(GHAL_NUM("eval", p_comply, eval.p_comply));
        f.push_back(GHAL_INT("eval", max_steps, eval.max_steps, int));
        f.push_back(GHAL_INT("eval", seed, eval.seed, std::uint64_t));
        return f;
    }();
    return all;
}

#undef GHAL_NUM
#undef GHAL_INT
#undef GHAL_BOOL

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg = default_config(base_dir);
    std::map<std::string, const Field*> index;
    for (const auto& f : fields()) {
        index[f.section + "." + f.key] = &f;
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("config: key '" + section + "' outside a section");
        }
        for (const auto& [key, value] : body) {
            const auto it = index.find(section + "." + key);
            if (it == index.end()) {
                throw ConfigError("config: unknown key " + section + "." + key);
            }
            it->second->set(cfg, value.data(), base_dir);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::string to_ini(const ExperimentConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

void apply_env_overrides(ExperimentConfig& cfg) {
    const char* seed = std::getenv("GHAL_SEED");
    if (seed != nullptr) {
        cfg.base_seed = to_integer<std::uint64_t>("GHAL_SEED", seed);
    }
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;  // field separator
        h *= 0x100000001b3ULL;
    };
    for (const auto& f : fields()) {
        if (f.hashed) {
            feed(f.section + "." + f.key + "=" + f.get(cfg));
        }
    }
    for (const auto& m : cfg.maps) {
        feed(read_file(m));
    }
    feed(cfg.policy.empty() ? std::string("<trained>") : read_file(cfg.policy));
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace ghal

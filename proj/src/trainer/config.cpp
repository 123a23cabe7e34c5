#include "copo/trainer/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "copo/util/ini.hpp"

namespace copo::trainer {
namespace {

using copo::IniEntry;
using copo::IniFile;
using copo::ParseError;

double parse_double(const IniEntry& e, const std::string& source) {
    try {
        size_t pos = 0;
        double v = std::stod(e.value, &pos);
        while (pos < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[pos]))) ++pos;
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, e.line, "bad number for '" + e.key + "': " + e.value);
    }
}

long long parse_ll(const IniEntry& e, const std::string& source) {
    try {
        size_t pos = 0;
        long long v = std::stoll(e.value, &pos);
        while (pos < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[pos]))) ++pos;
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, e.line, "bad integer for '" + e.key + "': " + e.value);
    }
}

int parse_int(const IniEntry& e, const std::string& source) {
    long long v = parse_ll(e, source);
    if (v < -2147483647LL || v > 2147483647LL)
        throw ParseError(source, e.line, "integer out of range for '" + e.key + "'");
    return static_cast<int>(v);
}

bool parse_bool(const IniEntry& e, const std::string& source) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ParseError(source, e.line, "bad bool for '" + e.key + "': " + e.value);
}

template <typename T, typename F>
std::vector<T> parse_list(const IniEntry& e, const std::string& source, F item) {
    std::vector<T> out;
    std::stringstream ss(e.value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        IniEntry sub{e.key, tok, e.line};
        out.push_back(item(sub, source));
    }
    if (out.empty()) throw ParseError(source, e.line, "empty list for '" + e.key + "'");
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void apply_entry(RunConfig& c, const IniEntry& e, const std::string& source) {
    const std::string& k = e.key;
    if (k == "scene") c.scene = e.value;
    else if (k == "algorithm") {
        try {
            c.algorithm = parse_algorithm(e.value);
        } catch (const std::exception& ex) {
            throw ParseError(source, e.line, ex.what());
        }
    } else if (k == "clip_eps") c.clip_eps = parse_double(e, source);
    else if (k == "kl_coeff") c.kl_coeff = parse_double(e, source);
    else if (k == "lr") c.lr = parse_double(e, source);
    else if (k == "kp_epochs") c.kp_epochs = parse_int(e, source);
    else if (k == "kphi_epochs") c.kphi_epochs = parse_int(e, source);
    else if (k == "minibatch") c.minibatch = parse_int(e, source);
    else if (k == "batch_env_steps") c.batch_env_steps = parse_int(e, source);
    else if (k == "gamma") c.gamma = parse_double(e, source);
    else if (k == "gamma_global") c.gamma_global = parse_double(e, source);
    else if (k == "gae_lambda") c.gae_lambda = parse_double(e, source);
    else if (k == "neighbor_radius") c.neighbor_radius = parse_double(e, source);
    else if (k == "lcf_lr") c.lcf_lr = parse_double(e, source);
    else if (k == "lcf_init_mean") c.lcf_init_mean = parse_double(e, source);
    else if (k == "lcf_init_std") c.lcf_init_std = parse_double(e, source);
    else if (k == "lcf_update") c.lcf_update = parse_bool(e, source);
    else if (k == "horizon") c.horizon = parse_int(e, source);
    else if (k == "feed_phi_to_policy") c.feed_phi_to_policy = parse_bool(e, source);
    else if (k == "entropy_coeff") c.entropy_coeff = parse_double(e, source);
    else if (k == "advantage_norm") c.advantage_norm = parse_bool(e, source);
    else if (k == "hidden") c.hidden = parse_list<int>(e, source, parse_int);
    else if (k == "log_std_init") c.log_std_init = parse_double(e, source);
    else if (k == "agent_count") c.agent_count = parse_int(e, source);
    else if (k == "mfpo_k") c.mfpo_k = parse_int(e, source);
    else if (k == "mfpo_radius") c.mfpo_radius = parse_double(e, source);
    else if (k == "seeds") {
        c.seeds = parse_list<std::uint64_t>(e, source, [](const IniEntry& s, const std::string& src) {
            long long v = parse_ll(s, src);
            if (v < 0) throw ParseError(src, s.line, "seed must be non-negative");
            return static_cast<std::uint64_t>(v);
        });
    } else if (k == "out_dir") c.out_dir = e.value;
    else if (k == "checkpoint_every") c.checkpoint_every = parse_int(e, source);
    else if (k == "max_env_steps") c.max_env_steps = parse_ll(e, source);
    else if (k == "workers") c.workers = parse_int(e, source);
    else throw ParseError(source, e.line, "unknown config key '" + k + "'");
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
    if (name == "ipo") return Algorithm::ipo;
    if (name == "mfpo_concat") return Algorithm::mfpo_concat;
    if (name == "mfpo_mean") return Algorithm::mfpo_mean;
    if (name == "mfpo_mean_cf") return Algorithm::mfpo_mean_cf;
    if (name == "copo") return Algorithm::copo;
    if (name == "curriculum") return Algorithm::curriculum;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::ipo: return "ipo";
        case Algorithm::mfpo_concat: return "mfpo_concat";
        case Algorithm::mfpo_mean: return "mfpo_mean";
        case Algorithm::mfpo_mean_cf: return "mfpo_mean_cf";
        case Algorithm::copo: return "copo";
        case Algorithm::curriculum: return "curriculum";
    }
    return "?";
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source_name,
                           const std::vector<std::string>& overrides) {
    IniFile ini = IniFile::parse(text, source_name);
    RunConfig c;
    for (const auto& sec : ini.sections) {
        if (!sec.name.empty())
            throw ParseError(source_name, sec.line, "unexpected section [" + sec.name + "]");
        for (const auto& e : sec.entries) apply_entry(c, e, source_name);
    }
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ParseError("<override>", 0, "override must be key=value: " + ov);
        IniEntry e{ov.substr(0, eq), ov.substr(eq + 1), 0};
        apply_entry(c, e, "<override>");
    }
    c.validate();
    return c;
}

RunConfig RunConfig::parse_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path, overrides);
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "scene = " << scene << "\n";
    out << "algorithm = " << algorithm_name(algorithm) << "\n";
    out << "clip_eps = " << fmt_double(clip_eps) << "\n";
    out << "kl_coeff = " << fmt_double(kl_coeff) << "\n";
    out << "lr = " << fmt_double(lr) << "\n";
    out << "kp_epochs = " << kp_epochs << "\n";
    out << "kphi_epochs = " << kphi_epochs << "\n";
    out << "minibatch = " << minibatch << "\n";
    out << "batch_env_steps = " << batch_env_steps << "\n";
    out << "gamma = " << fmt_double(gamma) << "\n";
    out << "gamma_global = " << fmt_double(gamma_global) << "\n";
    out << "gae_lambda = " << fmt_double(gae_lambda) << "\n";
    out << "neighbor_radius = " << fmt_double(neighbor_radius) << "\n";
    out << "lcf_lr = " << fmt_double(lcf_lr) << "\n";
    out << "lcf_init_mean = " << fmt_double(lcf_init_mean) << "\n";
    out << "lcf_init_std = " << fmt_double(lcf_init_std) << "\n";
    out << "lcf_update = " << (lcf_update ? "true" : "false") << "\n";
    out << "horizon = " << horizon << "\n";
    out << "feed_phi_to_policy = " << (feed_phi_to_policy ? "true" : "false") << "\n";
    out << "entropy_coeff = " << fmt_double(entropy_coeff) << "\n";
    out << "advantage_norm = " << (advantage_norm ? "true" : "false") << "\n";
    out << "hidden = ";
    for (size_t i = 0; i < hidden.size(); ++i) out << (i ? "," : "") << hidden[i];
    out << "\n";
    out << "log_std_init = " << fmt_double(log_std_init) << "\n";
    out << "agent_count = " << agent_count << "\n";
    out << "mfpo_k = " << mfpo_k << "\n";
    out << "mfpo_radius = " << fmt_double(mfpo_radius) << "\n";
    out << "seeds = ";
    for (size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
    out << "\n";
    out << "out_dir = " << out_dir << "\n";
    out << "checkpoint_every = " << checkpoint_every << "\n";
    out << "max_env_steps = " << max_env_steps << "\n";
    out << "workers = " << workers << "\n";
    return out.str();
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) fail("clip_eps must be in (0, 1)");
    if (kl_coeff < 0.0) fail("kl_coeff must be >= 0");
    if (!(lr > 0.0)) fail("lr must be > 0");
    if (kp_epochs < 1) fail("kp_epochs must be >= 1");
    if (kphi_epochs < 1) fail("kphi_epochs must be >= 1");
    if (minibatch < 1) fail("minibatch must be >= 1");
    if (batch_env_steps < 1) fail("batch_env_steps must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
    if (!(gamma_global >= 0.0 && gamma_global <= 1.0)) fail("gamma_global must be in [0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must be in [0, 1]");
    if (!(neighbor_radius > 0.0)) fail("neighbor_radius must be > 0");
    if (!(lcf_lr > 0.0)) fail("lcf_lr must be > 0");
    if (lcf_init_std < 0.0) fail("lcf_init_std must be >= 0");
    if (horizon < 1) fail("horizon must be >= 1");
    if (entropy_coeff < 0.0) fail("entropy_coeff must be >= 0");
    if (hidden.empty()) fail("hidden must list at least one layer width");
    for (int h : hidden)
        if (h < 1) fail("hidden layer widths must be >= 1");
    if (agent_count < 0) fail("agent_count must be >= 0");
    if (mfpo_k < 1) fail("mfpo_k must be >= 1");
    if (!(mfpo_radius > 0.0)) fail("mfpo_radius must be > 0");
    if (seeds.empty()) fail("seeds must list at least one seed");
    if (checkpoint_every < 1) fail("checkpoint_every must be >= 1");
    if (max_env_steps < 1) fail("max_env_steps must be >= 1");
    if (workers < 1) fail("workers must be >= 1");
}

}  // namespace copo::trainer

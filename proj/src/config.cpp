#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "advd/attacks.hpp"
#include "advd/config.hpp"
#include "advd/rng.hpp"

namespace advd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return u;
    } catch (...) {
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

}  // namespace

ExperimentConfig default_config(DatasetId dataset) {
    ExperimentConfig c;
    c.dataset = dataset;
    switch (dataset) {
        case DatasetId::mnist_digit:
            c.eps_list = {0.12, 0.30};
            c.closeness_eps = 0.2;
            break;
        case DatasetId::mnist_fashion:
            c.eps_list = {0.03, 0.12};
            c.closeness_eps = 0.07;
            break;
        case DatasetId::cifar10:
            c.eps_list = {0.02, 0.04};
            c.closeness_eps = 0.03;
            c.cnn_epochs = 50;
            c.cnn_batch = 128;
            c.mlp_epochs = 150;
            break;
    }
    return c;
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        try {
            const DatasetId id = dataset_from_string(value);
            // re-derive dataset-dependent defaults only for untouched fields:
            // keep it simple and explicit — switching dataset resets them.
            const ExperimentConfig fresh = default_config(id);
            c.dataset = id;
            c.eps_list = fresh.eps_list;
            c.closeness_eps = fresh.closeness_eps;
            c.cnn_epochs = fresh.cnn_epochs;
            c.cnn_batch = fresh.cnn_batch;
            c.mlp_epochs = fresh.mlp_epochs;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "data_dir") {
        c.data_dir = value;
    } else if (key == "out_dir") {
        c.out_dir = value;
    } else if (key == "seed") {
        c.seed = parse_u64(key, value);
    } else if (key == "attacks") {
        c.attacks = split_list(value);
        for (const auto& a : c.attacks) {
            try {
                attack_from_string(a);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    } else if (key == "eps_list") {
        c.eps_list.clear();
        for (const auto& t : split_list(value)) c.eps_list.push_back(parse_double(key, t));
    } else if (key == "sweep_eps_list") {
        c.sweep_eps_list.clear();
        for (const auto& t : split_list(value)) c.sweep_eps_list.push_back(parse_double(key, t));
    } else if (key == "closeness_eps") {
        c.closeness_eps = parse_double(key, value);
    } else if (key == "T") {
        c.T = parse_u64(key, value);
        if (c.T < 1) throw ConfigError("config: T must be >= 1");
    } else if (key == "cap") {
        c.cap = parse_u64(key, value);
        if (c.cap < 1) throw ConfigError("config: cap must be >= 1");
    } else if (key == "closeness_cap") {
        c.closeness_cap = parse_u64(key, value);
    } else if (key == "train_cap") {
        c.train_cap = parse_u64(key, value);
    } else if (key == "cnn_epochs") {
        c.cnn_epochs = parse_u64(key, value);
    } else if (key == "cnn_batch") {
        c.cnn_batch = parse_u64(key, value);
        if (c.cnn_batch < 1) throw ConfigError("config: cnn_batch must be >= 1");
    } else if (key == "cnn_lr") {
        c.cnn_lr = parse_double(key, value);
    } else if (key == "mlp_epochs") {
        c.mlp_epochs = parse_u64(key, value);
    } else if (key == "mlp_batch") {
        c.mlp_batch = parse_u64(key, value);
        if (c.mlp_batch < 1) throw ConfigError("config: mlp_batch must be >= 1");
    } else if (key == "mlp_lr") {
        c.mlp_lr = parse_double(key, value);
    } else if (key == "cnn_checkpoint") {
        c.cnn_checkpoint = value;
    } else if (key == "mlp_checkpoint") {
        c.mlp_checkpoint = value;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }

    for (double e : c.eps_list)
        if (e < 0.0) throw ConfigError("config: eps values must be >= 0");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c = default_config(DatasetId::mnist_digit);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
        apply_override(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "dataset = " << to_string(c.dataset) << "\n";
    os << "data_dir = " << c.data_dir << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "seed = " << c.seed << "\n";
    os << "attacks = " << join_strings(c.attacks) << "\n";
    os << "eps_list = " << join_doubles(c.eps_list) << "\n";
    os << "sweep_eps_list = " << join_doubles(c.sweep_eps_list) << "\n";
    os << "closeness_eps = " << fmt_double(c.closeness_eps) << "\n";
    os << "T = " << c.T << "\n";
    os << "cap = " << c.cap << "\n";
    os << "closeness_cap = " << c.closeness_cap << "\n";
    os << "train_cap = " << c.train_cap << "\n";
    os << "cnn_epochs = " << c.cnn_epochs << "\n";
    os << "cnn_batch = " << c.cnn_batch << "\n";
    os << "cnn_lr = " << fmt_double(c.cnn_lr) << "\n";
    os << "mlp_epochs = " << c.mlp_epochs << "\n";
    os << "mlp_batch = " << c.mlp_batch << "\n";
    os << "mlp_lr = " << fmt_double(c.mlp_lr) << "\n";
    os << "cnn_checkpoint = " << c.cnn_checkpoint << "\n";
    os << "mlp_checkpoint = " << c.mlp_checkpoint << "\n";
    return os.str();
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(render_config(c))));
    return buf;
}

std::string cnn_checkpoint_path(const ExperimentConfig& c) {
    if (!c.cnn_checkpoint.empty()) return c.cnn_checkpoint;
    return c.out_dir + "/cnn_" + to_string(c.dataset) + ".advd";
}

std::string mlp_checkpoint_path(const ExperimentConfig& c) {
    if (!c.mlp_checkpoint.empty()) return c.mlp_checkpoint;
    return c.out_dir + "/mlp_" + to_string(c.dataset) + ".advd";
}

}  // namespace advd

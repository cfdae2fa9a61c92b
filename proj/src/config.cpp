#include "dab/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace dab {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key))
        throw ConfigError("missing mandatory field: " + key);
    if (!j.at(key).is_number())
        throw ConfigError("field is not a number: " + key);
    return j.at(key).get<double>();
}

HarmonicResistance parse_resistance(const json& j, const std::string& key) {
    HarmonicResistance r;
    if (!j.contains(key))
        throw ConfigError("missing mandatory field: " + key);
    const json& v = j.at(key);
    if (v.is_number()) {
        r.fundamental = v.get<double>();
        return r;
    }
    if (!v.is_object() || !v.contains("1"))
        throw ConfigError(key + ": resistance table must contain the k=1 entry");
    for (const auto& [k_str, val] : v.items()) {
        int k = 0;
        try {
            k = std::stoi(k_str);
        } catch (const std::exception&) {
            throw ConfigError(key + ": bad harmonic index '" + k_str + "'");
        }
        if (k == 1)
            r.fundamental = val.get<double>();
        else
            r.overrides[k] = val.get<double>();
    }
    return r;
}

CossCurve parse_coss(const json& j, const std::string& key,
                     const std::filesystem::path& base_dir) {
    CossCurve curve;
    if (!j.contains(key)) return curve;
    const json& v = j.at(key);
    if (v.is_object() && v.contains("csv")) {
        std::filesystem::path p = v.at("csv").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError(key + ": cannot open Coss csv " + p.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            CossCurve::Point pt;
            if (ls >> pt.v_ds >> pt.c) curve.points.push_back(pt);
        }
    } else if (v.is_array()) {
        for (const auto& pair : v) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError(key + ": expected [v_ds, C] pairs");
            curve.points.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
    } else {
        throw ConfigError(key + ": expected pair list or {\"csv\": path}");
    }
    return curve;
}

Winding parse_winding(const std::string& s) {
    if (s == "transformer") return Winding::Transformer;
    if (s == "primary_inductor") return Winding::PrimaryInductor;
    if (s == "secondary_inductor") return Winding::SecondaryInductor;
    throw ConfigError("unknown core winding: " + s);
}

const char* winding_name(Winding w) {
    switch (w) {
        case Winding::Transformer: return "transformer";
        case Winding::PrimaryInductor: return "primary_inductor";
        case Winding::SecondaryInductor: return "secondary_inductor";
    }
    return "?";
}

void parse_leg_times(const json& j, const std::string& key,
                     std::array<double, 4>& out) {
    if (!j.contains(key)) {
        out.fill(0.0);
        return;
    }
    const json& v = j.at(key);
    if (v.is_number()) {
        out.fill(v.get<double>());
        return;
    }
    for (Leg leg : kAllLegs) {
        const std::string name = leg_name(leg);
        if (!v.contains(name))
            throw ConfigError(key + ": missing leg entry " + name);
        out[static_cast<int>(leg)] = v.at(name).get<double>();
    }
}

}  // namespace

CircuitParams parse_config(const std::string& json_text,
                           const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.contains("circuit"))
        throw ConfigError("missing mandatory section: circuit");
    const json& c = root.at("circuit");

    CircuitParams p;
    p.vin_nominal = require_number(c, "vin_nominal");
    p.fsw = require_number(c, "fsw");
    p.turns_ratio = require_number(c, "turns_ratio");
    p.lp = require_number(c, "Lp");
    p.ls_prime = require_number(c, "Ls_prime");
    p.lm = require_number(c, "Lm");
    p.llp = require_number(c, "Llp");
    p.lls = require_number(c, "Lls");
    p.rp = parse_resistance(c, "Rp");
    p.rs = parse_resistance(c, "Rs");
    p.rlp = parse_resistance(c, "Rlp");
    p.rls = parse_resistance(c, "Rls");
    p.cip = c.value("Cip", 0.0);
    p.cis = c.value("Cis", 0.0);
    p.cps = c.value("Cps", 0.0);
    p.td = c.value("Td", 0.0);
    p.k_max = c.value("k_max", 21);
    p.rated_power = c.value("rated_power", 2000.0);
    p.vout_min = c.value("vout_min", 80.0);
    p.vout_max = c.value("vout_max", 150.0);
    p.lumped_includes_leakage = c.value("lumped_includes_leakage", true);
    p.coss_primary = parse_coss(c, "coss_primary", base_dir);
    p.coss_secondary = parse_coss(c, "coss_secondary", base_dir);
    parse_leg_times(c, "t_on", p.t_on);
    parse_leg_times(c, "t_off", p.t_off);

    if (c.contains("cores")) {
        for (const auto& jc : c.at("cores")) {
            MagneticCore core;
            core.winding = parse_winding(jc.value("winding", std::string("transformer")));
            core.n_turns = require_number(jc, "N_turns");
            core.ae_m2 = require_number(jc, "Ae");
            core.vcore_cm3 = require_number(jc, "Vcore_cm3");
            core.t_core_c = jc.value("T_core", 25.0);
            core.b_sat = jc.value("B_sat", 0.47);
            p.cores.push_back(core);
        }
    }

    p.validate();
    return p;
}

CircuitParams load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::string serialize_config(const CircuitParams& p) {
    json c;
    c["vin_nominal"] = p.vin_nominal;
    c["fsw"] = p.fsw;
    c["turns_ratio"] = p.turns_ratio;
    c["Lp"] = p.lp;
    c["Ls_prime"] = p.ls_prime;
    c["Lm"] = p.lm;
    c["Llp"] = p.llp;
    c["Lls"] = p.lls;
    auto dump_r = [](const HarmonicResistance& r) -> json {
        if (r.overrides.empty()) return r.fundamental;
        json t;
        t["1"] = r.fundamental;
        for (const auto& [k, v] : r.overrides) t[std::to_string(k)] = v;
        return t;
    };
    c["Rp"] = dump_r(p.rp);
    c["Rs"] = dump_r(p.rs);
    c["Rlp"] = dump_r(p.rlp);
    c["Rls"] = dump_r(p.rls);
    c["Cip"] = p.cip;
    c["Cis"] = p.cis;
    c["Cps"] = p.cps;
    c["Td"] = p.td;
    c["k_max"] = p.k_max;
    c["rated_power"] = p.rated_power;
    c["vout_min"] = p.vout_min;
    c["vout_max"] = p.vout_max;
    c["lumped_includes_leakage"] = p.lumped_includes_leakage;
    auto dump_coss = [](const CossCurve& curve) {
        json arr = json::array();
        for (const auto& pt : curve.points) arr.push_back({pt.v_ds, pt.c});
        return arr;
    };
    if (!p.coss_primary.points.empty()) c["coss_primary"] = dump_coss(p.coss_primary);
    if (!p.coss_secondary.points.empty()) c["coss_secondary"] = dump_coss(p.coss_secondary);
    auto dump_times = [](const std::array<double, 4>& t) {
        json o;
        for (Leg leg : kAllLegs) o[leg_name(leg)] = t[static_cast<int>(leg)];
        return o;
    };
    c["t_on"] = dump_times(p.t_on);
    c["t_off"] = dump_times(p.t_off);
    json cores = json::array();
    for (const auto& core : p.cores) {
        json jc;
        jc["winding"] = winding_name(core.winding);
        jc["N_turns"] = core.n_turns;
        jc["Ae"] = core.ae_m2;
        jc["Vcore_cm3"] = core.vcore_cm3;
        jc["T_core"] = core.t_core_c;
        jc["B_sat"] = core.b_sat;
        cores.push_back(jc);
    }
    if (!cores.empty()) c["cores"] = cores;

    json root;
    root["circuit"] = c;
    return root.dump(2) + "\n";
}

void save_config(const CircuitParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config file: " + path.string());
    out << serialize_config(params);
}

std::string file_hash(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

CircuitParams nominal_params() {
    CircuitParams p;
    p.vin_nominal = 160.0;
    p.fsw = 100e3;
    p.turns_ratio = 7.0 / 5.0;
    p.lp = 5.35e-6;
    p.ls_prime = 2.65e-6;
    p.lm = 770e-6;
    p.llp = 0.24e-6;
    p.lls = 0.123e-6;
    p.rp.fundamental = 0.040;
    p.rs.fundamental = 0.010;
    p.rlp.fundamental = 0.012;
    p.rls.fundamental = 0.005;
    p.cip = 150e-12;
    p.cis = 200e-12;
    p.cps = 100e-12;
    p.td = 100e-9;
    // Two paralleled GaN devices per switch position on each bridge.
    p.coss_primary.points = {{0.0, 2.6e-9}, {25.0, 1.30e-9}, {50.0, 0.90e-9},
                             {100.0, 0.70e-9}, {150.0, 0.62e-9}, {200.0, 0.60e-9},
                             {250.0, 0.58e-9}};
    p.coss_secondary.points = {{0.0, 3.0e-9}, {25.0, 1.6e-9}, {50.0, 1.3e-9},
                               {100.0, 1.15e-9}, {150.0, 1.05e-9}, {200.0, 1.0e-9},
                               {250.0, 0.98e-9}};
    p.t_on.fill(6e-9);
    p.t_off.fill(10e-9);
    p.cores = {
        {Winding::Transformer, 7.0, 3.88e-4, 20.4, 60.0, 0.47},
        {Winding::PrimaryInductor, 4.0, 2.0e-4, 10.0, 60.0, 0.47},
        {Winding::SecondaryInductor, 4.0, 1.0e-4, 5.2, 60.0, 0.47},
    };
    p.k_max = 21;
    p.rated_power = 2000.0;
    return p;
}

}  // namespace dab

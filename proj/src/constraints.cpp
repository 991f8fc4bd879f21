// SPDX-License-Identifier: Apache-2.0

#include "mssteer/constraints.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mssteer {

using nlohmann::json;

namespace {
constexpr const char* kConstraintsFormat = "ms-steer/constraints/1";
constexpr const char* kProvenanceFormat = "ms-steer/provenance/1";
}  // namespace

ConstraintFamily family_of(const Constraint& c) {
    switch (c.index()) {
        case 0: return ConstraintFamily::xl_pos;
        case 1: return ConstraintFamily::xl_neg;
        case 2: return ConstraintFamily::hdx_proxy;
        default: return ConstraintFamily::hdx_burial;
    }
}

const char* family_name(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::xl_pos: return "xl_positive";
        case ConstraintFamily::xl_neg: return "xl_negative";
        case ConstraintFamily::hdx_proxy: return "hdx_proxy";
        default: return "hdx_burial";
    }
}

bool ConstraintSet::has_family(ConstraintFamily f) const { return family_count(f) > 0; }

std::size_t ConstraintSet::family_count(ConstraintFamily f) const {
    std::size_t n = 0;
    for (const auto& c : items)
        if (family_of(c) == f) ++n;
    return n;
}

ConstraintSet ConstraintSet::subset(const std::vector<int>& indices) const {
    ConstraintSet out;
    for (int k : indices) {
        if (k < 0 || static_cast<std::size_t>(k) >= items.size())
            throw config_error("constraint index " + std::to_string(k) + " out of range");
        out.items.push_back(items[static_cast<std::size_t>(k)]);
        if (!provenance.empty()) out.provenance.push_back(provenance[static_cast<std::size_t>(k)]);
    }
    return out;
}

void ConstraintSet::append(const ConstraintSet& other) {
    if (!provenance.empty() || !other.provenance.empty()) {
        if (provenance.empty()) provenance.assign(items.size(), "");
        std::vector<std::string> labels = other.provenance;
        if (labels.empty()) labels.assign(other.items.size(), "");
        provenance.insert(provenance.end(), labels.begin(), labels.end());
    }
    items.insert(items.end(), other.items.begin(), other.items.end());
}

void ConstraintSet::validate() const {
    if (!provenance.empty() && provenance.size() != items.size())
        throw config_error("provenance labels do not match constraint count");
    for (std::size_t k = 0; k < items.size(); ++k) {
        const Constraint& c = items[k];
        const std::string where = "constraint " + std::to_string(k);
        if (const auto* p = std::get_if<XlPositive>(&c)) {
            if (!(p->d_min <= p->d_max)) throw config_error(where + ": d_min > d_max");
            if (!(p->d_max > 0.0)) throw config_error(where + ": d_max must be > 0");
            if (p->d_min < 0.0) throw config_error(where + ": d_min must be >= 0");
        } else if (const auto* n = std::get_if<XlNegative>(&c)) {
            if (!(n->d_min > 0.0)) throw config_error(where + ": d_min must be > 0");
        } else if (const auto* h = std::get_if<HdxProxy>(&c)) {
            if (!(h->delta >= 0.0 && h->delta <= 1.0))
                throw config_error(where + ": delta outside [0,1]");
            if (h->partner_chain.empty()) throw config_error(where + ": empty partner_chain");
        } else if (const auto* b = std::get_if<HdxBurial>(&c)) {
            if (!(b->delta >= 0.0 && b->delta <= 1.0))
                throw config_error(where + ": delta outside [0,1]");
        }
    }
}

namespace {

json constraint_to_json(const Constraint& c) {
    if (const auto* p = std::get_if<XlPositive>(&c)) {
        return {{"type", "xl_positive"}, {"chain_i", p->i.chain_id}, {"res_i", p->i.seq_number},
                {"chain_j", p->j.chain_id}, {"res_j", p->j.seq_number}, {"d_min", p->d_min},
                {"d_max", p->d_max}};
    }
    if (const auto* n = std::get_if<XlNegative>(&c)) {
        return {{"type", "xl_negative"}, {"chain_i", n->i.chain_id}, {"res_i", n->i.seq_number},
                {"chain_j", n->j.chain_id}, {"res_j", n->j.seq_number}, {"d_min", n->d_min}};
    }
    if (const auto* h = std::get_if<HdxProxy>(&c)) {
        return {{"type", "hdx_proxy"}, {"chain", h->residue.chain_id},
                {"res", h->residue.seq_number}, {"partner_chain", h->partner_chain},
                {"delta", h->delta}};
    }
    const auto& b = std::get<HdxBurial>(c);
    return {{"type", "hdx_burial"}, {"chain", b.residue.chain_id}, {"res", b.residue.seq_number},
            {"delta", b.delta}};
}

void require_exact_keys(const json& j, std::initializer_list<const char*> keys,
                        const std::string& where) {
    for (const char* k : keys)
        if (!j.contains(k)) throw parse_error(where + ": missing key '" + k + "'");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        bool known = false;
        for (const char* want : keys) known = known || k == want;
        if (!known) throw parse_error(where + ": unknown key '" + k + "'");
    }
}

Constraint constraint_from_json(const json& j, std::size_t index) {
    const std::string where = "constraint " + std::to_string(index);
    if (!j.contains("type")) throw parse_error(where + ": missing key 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "xl_positive") {
        require_exact_keys(j, {"type", "chain_i", "res_i", "chain_j", "res_j", "d_min", "d_max"},
                           where);
        return XlPositive{{j.at("chain_i").get<std::string>(), j.at("res_i").get<int>()},
                          {j.at("chain_j").get<std::string>(), j.at("res_j").get<int>()},
                          j.at("d_min").get<double>(),
                          j.at("d_max").get<double>()};
    }
    if (type == "xl_negative") {
        require_exact_keys(j, {"type", "chain_i", "res_i", "chain_j", "res_j", "d_min"}, where);
        return XlNegative{{j.at("chain_i").get<std::string>(), j.at("res_i").get<int>()},
                          {j.at("chain_j").get<std::string>(), j.at("res_j").get<int>()},
                          j.at("d_min").get<double>()};
    }
    if (type == "hdx_proxy") {
        require_exact_keys(j, {"type", "chain", "res", "partner_chain", "delta"}, where);
        return HdxProxy{{j.at("chain").get<std::string>(), j.at("res").get<int>()},
                        j.at("partner_chain").get<std::string>(),
                        j.at("delta").get<double>()};
    }
    if (type == "hdx_burial") {
        require_exact_keys(j, {"type", "chain", "res", "delta"}, where);
        return HdxBurial{{j.at("chain").get<std::string>(), j.at("res").get<int>()},
                         j.at("delta").get<double>()};
    }
    throw parse_error(where + ": unknown constraint type '" + type + "'");
}

}  // namespace

std::string constraints_to_json(const ConstraintSet& set) {
    json arr = json::array();
    for (const auto& c : set.items) arr.push_back(constraint_to_json(c));
    json j = {{"format", kConstraintsFormat}, {"constraints", arr}};
    return j.dump(2);
}

ConstraintSet constraints_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("constraints JSON: ") + e.what());
    }
    try {
        require_exact_keys(j, {"format", "constraints"}, "constraints document");
        if (j.at("format").get<std::string>() != kConstraintsFormat)
            throw parse_error("unsupported constraints format '" +
                              j.at("format").get<std::string>() + "'");
        ConstraintSet set;
        std::size_t index = 0;
        for (const auto& cj : j.at("constraints")) set.items.push_back(constraint_from_json(cj, index++));
        set.validate();
        return set;
    } catch (const json::exception& e) {
        throw parse_error(std::string("constraints JSON: ") + e.what());
    }
}

ConstraintSet read_constraints_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return constraints_from_json(buf.str());
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void write_constraints_file(const ConstraintSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write file: " + path);
    out << constraints_to_json(set) << '\n';
    if (!out) throw config_error("write failed: " + path);
}

std::string provenance_to_json(const ConstraintSet& set) {
    json labels = json::array();
    for (std::size_t k = 0; k < set.items.size(); ++k)
        labels.push_back(set.provenance.empty() ? "" : set.provenance[k]);
    json j = {{"format", kProvenanceFormat}, {"labels", labels}};
    return j.dump(2);
}

void apply_provenance_json(ConstraintSet& set, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("provenance JSON: ") + e.what());
    }
    try {
        require_exact_keys(j, {"format", "labels"}, "provenance document");
        if (j.at("format").get<std::string>() != kProvenanceFormat)
            throw parse_error("unsupported provenance format");
        std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
        if (labels.size() != set.items.size())
            throw parse_error("provenance label count does not match constraint count");
        set.provenance = std::move(labels);
    } catch (const json::exception& e) {
        throw parse_error(std::string("provenance JSON: ") + e.what());
    }
}

}  // namespace mssteer

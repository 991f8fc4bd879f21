// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mssteer/geometry.hpp"

namespace mssteer {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_coord(const std::string& field, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (trim(field.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw parse_error("line " + std::to_string(line_no) + ": bad " + what + " field '" +
                      trim(field) + "'");
}

int parse_int(const std::string& field, int line_no, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(field, &pos);
        if (trim(field.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw parse_error("line " + std::to_string(line_no) + ": bad " + what + " field '" +
                      trim(field) + "'");
}

// First letter of the atom name; digits and spaces prefix hydrogens ("1HG1")
// and padding (" CA "), so they are skipped.
std::string element_from_name(const std::string& raw_name, int line_no) {
    for (char ch : raw_name) {
        if (std::isalpha(static_cast<unsigned char>(ch)))
            return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    throw parse_error("line " + std::to_string(line_no) + ": atom name '" + trim(raw_name) +
                      "' has no element letter");
}

}  // namespace

Structure parse_structure(const std::string& text) {
    Structure s;
    std::unordered_map<std::string, std::size_t> chain_pos;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int models_seen = 0;
    bool done = false;

    while (!done && std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string record = line.substr(0, 6);
        if (record == "MODEL ") {
            ++models_seen;
            if (models_seen > 1) break;  // first model only
            continue;
        }
        if (record == "ENDMDL") {
            done = true;
            continue;
        }
        if (record != "ATOM  ") continue;  // HETATM and remarks skipped

        std::string padded = line;
        if (padded.size() < 80) padded.resize(80, ' ');

        char alt_loc = padded[16];
        if (alt_loc != ' ' && alt_loc != 'A') continue;
        if (padded[26] != ' ')
            throw parse_error("line " + std::to_string(line_no) +
                              ": insertion codes are not supported");

        std::string atom_name = trim(padded.substr(12, 4));
        std::string res_name = trim(padded.substr(17, 3));
        std::string chain_id = trim(padded.substr(21, 1));
        int res_seq = parse_int(padded.substr(22, 4), line_no, "residue number");
        Vec3 pos{parse_coord(padded.substr(30, 8), line_no, "x"),
                 parse_coord(padded.substr(38, 8), line_no, "y"),
                 parse_coord(padded.substr(46, 8), line_no, "z")};
        std::string element = trim(padded.substr(76, 2));
        if (element.empty()) element = element_from_name(padded.substr(12, 4), line_no);
        for (char& ch : element) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));

        if (chain_id.empty()) chain_id = "A";
        if (res_name.empty()) res_name = "UNK";
        if (atom_name.empty())
            throw parse_error("line " + std::to_string(line_no) + ": blank atom name");

        auto it = chain_pos.find(chain_id);
        if (it == chain_pos.end()) {
            chain_pos.emplace(chain_id, s.chains.size());
            s.chains.push_back(Chain{chain_id, {}});
            it = chain_pos.find(chain_id);
        }
        Chain& chain = s.chains[it->second];

        if (chain.residues.empty() || chain.residues.back().seq_number != res_seq) {
            chain.residues.push_back(Residue{res_seq, res_name, {}});
        } else if (chain.residues.back().amino_acid != res_name) {
            throw parse_error("line " + std::to_string(line_no) + ": residue " + chain_id + ":" +
                              std::to_string(res_seq) + " changes name from " +
                              chain.residues.back().amino_acid + " to " + res_name);
        }
        chain.residues.back().atoms.push_back(Atom{atom_name, element, pos});
    }

    if (s.chains.empty()) throw parse_error("no ATOM records found");
    s.validate();
    return s;
}

Structure read_pdb_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_structure(buf.str());
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void write_pdb(const Structure& s, std::ostream& out) {
    int serial = 0;
    char buf[96];
    for (const auto& chain : s.chains) {
        const Residue* last = nullptr;
        for (const auto& r : chain.residues) {
            for (const auto& a : r.atoms) {
                serial = serial % 99999 + 1;
                // Short names get the conventional leading space (" CA ").
                std::string name = a.name;
                if (name.size() < 4) name = " " + name;
                std::snprintf(buf, sizeof(buf),
                              "ATOM  %5d %-4s %-3s %1s%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s",
                              serial, name.c_str(), r.amino_acid.c_str(), chain.chain_id.c_str(),
                              r.seq_number, a.position.x, a.position.y, a.position.z, 1.0, 0.0,
                              a.element.c_str());
                out << buf << '\n';
            }
            last = &r;
        }
        if (last) {
            serial = serial % 99999 + 1;
            std::snprintf(buf, sizeof(buf), "TER   %5d      %-3s %1s%4d", serial,
                          last->amino_acid.c_str(), chain.chain_id.c_str(), last->seq_number);
            out << buf << '\n';
        }
    }
    out << "END\n";
}

std::string to_pdb(const Structure& s) {
    std::ostringstream out;
    write_pdb(s, out);
    return out.str();
}

void write_pdb_file(const Structure& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write file: " + path);
    write_pdb(s, out);
    if (!out) throw config_error("write failed: " + path);
}

}  // namespace mssteer

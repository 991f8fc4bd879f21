// SPDX-License-Identifier: Apache-2.0

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mssteer/engine.hpp"
#include "mssteer/errors.hpp"

namespace mssteer {

namespace fs = std::filesystem;
using nlohmann::json;

ExternalDenoiser::ExternalDenoiser(std::string command) : command_(std::move(command)) {
    if (command_.empty()) throw config_error("external denoiser command must be non-empty");
}

namespace {

fs::path unique_temp(const char* tag) {
    static std::atomic<unsigned long> counter{0};
    std::ostringstream name;
    name << "mssteer-" << tag << "-" << ::getpid() << "-" << counter.fetch_add(1) << ".json";
    return fs::temp_directory_path() / name.str();
}

}  // namespace

std::vector<Vec3> ExternalDenoiser::predict_x0(std::span<const Vec3> x, double sigma) const {
    json request;
    request["sigma"] = sigma;
    json coords = json::array();
    for (const Vec3& v : x) coords.push_back({v.x, v.y, v.z});
    request["coords"] = std::move(coords);

    const fs::path in_path = unique_temp("in");
    const fs::path out_path = unique_temp("out");
    {
        std::ofstream in(in_path);
        in << request.dump();
        if (!in) throw config_error("failed to stage external denoiser input");
    }

    const std::string cmd = command_ + " < " + in_path.string() + " > " + out_path.string();
    const int rc = std::system(cmd.c_str());

    std::string body;
    {
        std::ifstream out(out_path);
        std::ostringstream buf;
        buf << out.rdbuf();
        body = buf.str();
    }
    std::error_code ec;
    fs::remove(in_path, ec);
    fs::remove(out_path, ec);

    if (rc != 0)
        throw config_error("external denoiser command failed with status " + std::to_string(rc));

    json reply;
    try {
        reply = json::parse(body);
    } catch (const json::exception& e) {
        throw parse_error(std::string("external denoiser produced invalid JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("coords") || !reply["coords"].is_array())
        throw parse_error("external denoiser reply is missing a coords array");
    const json& rows = reply["coords"];
    if (rows.size() != x.size())
        throw correspondence_error("external denoiser returned " + std::to_string(rows.size()) +
                                   " coordinates, expected " + std::to_string(x.size()));
    std::vector<Vec3> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const json& row = rows[i];
        if (!row.is_array() || row.size() != 3)
            throw parse_error("external denoiser coordinates must be [x,y,z] triples");
        out[i] = Vec3{row[0].get<double>(), row[1].get<double>(), row[2].get<double>()};
    }
    return out;
}

}  // namespace mssteer

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fsgu/metrics.hpp"
#include "fsgu/resample.hpp"

namespace fsgu {

using json = nlohmann::ordered_json;

inline json metric_report_json(const MetricReport& r) {
    json j;
    j["p2point_ab"] = r.p2point_ab;
    j["p2point_ba"] = r.p2point_ba;
    j["p2point_sym"] = r.p2point_sym;
    j["p2plane_ab"] = r.p2plane_ab;
    j["p2plane_ba"] = r.p2plane_ba;
    j["p2plane_sym"] = r.p2plane_sym;
    j["aggregation"] = aggregation_name(r.aggregation);
    j["normal_source"] = r.normal_source;
    j["n_test"] = r.n_test;
    j["n_ref"] = r.n_ref;
    return j;
}

inline std::string metric_report_text(const MetricReport& r) {
    std::string out;
    const json j = metric_report_json(r);
    for (const auto& [key, value] : j.items()) {
        out += key;
        out += ": ";
        out += value.is_string() ? value.get<std::string>() : value.dump();
        out += '\n';
    }
    return out;
}

struct RunInfo {
    std::string input;
    std::string output;
    std::size_t n_in = 0;
    double wall_time_ms = -1.0;  // negative = leave out, keeping the report deterministic
};

inline json upsample_run_report(const UpsampleResult& result, const UpsampleConfig& cfg, const RunInfo& info) {
    json j;
    j["input"] = info.input;
    j["output"] = info.output;
    j["n_in"] = info.n_in;
    j["n_out"] = info.n_in + result.achieved_new;
    j["scale_requested"] = cfg.scale;
    j["scale_achieved"] =
        static_cast<double>(info.n_in + result.achieved_new) / static_cast<double>(info.n_in);
    j["grid_resolution"] = result.grid_resolution;
    j["requested_new"] = result.requested_new;
    j["achieved_new"] = result.achieved_new;
    j["shortfall"] = result.shortfall;
    json cfg_j;
    cfg_j["scale"] = cfg.scale;
    cfg_j["grid"] = cfg.grid_resolution;
    cfg_j["kmax"] = cfg.model.k_max;
    cfg_j["max_iter"] = cfg.model.max_iter;
    cfg_j["gamma"] = cfg.model.gamma;
    cfg_j["rho"] = cfg.model.rho;
    cfg_j["rho_f"] = cfg.model.rho_f;
    cfg_j["stop_eps"] = cfg.model.stop_eps;
    cfg_j["min_block_points"] = cfg.min_block_points;
    cfg_j["clamp_margin"] = cfg.clamp_margin;
    j["config"] = cfg_j;
    if (info.wall_time_ms >= 0.0) j["wall_time_ms"] = info.wall_time_ms;
    json blocks = json::array();
    for (const BlockStats& b : result.blocks) {
        json bj;
        bj["cell"] = {b.cell[0], b.cell[1], b.cell[2]};
        bj["points_in"] = b.points_in;
        bj["quota"] = b.quota;
        bj["achieved"] = b.achieved;
        bj["eligible"] = b.eligible;
        bj["q_axis"] = std::string(1, "xyz"[b.q_axis]);
        bj["fitted"] = b.fitted;
        bj["iterations"] = b.fit_iterations;
        bj["final_energy"] = b.final_energy;
        blocks.push_back(bj);
    }
    j["blocks"] = blocks;
    return j;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace fsgu

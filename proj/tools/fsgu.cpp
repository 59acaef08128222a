// fsgu: frequency-selective geometry upsampling for point clouds.
//
// Verbs:
//   upsample  insert new points on a locally fitted frequency model
//   evaluate  P2Point / P2Plane distortion between two clouds
//   synth     analytic test surfaces with exact normals
//   bench     downsample/upsample/evaluate tables over a manifest

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fsgu/metrics.hpp"
#include "fsgu/ply_io.hpp"
#include "fsgu/point_cloud.hpp"
#include "fsgu/report.hpp"
#include "fsgu/resample.hpp"
#include "fsgu/synth.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct OutputGuard {
    std::vector<std::string> paths;
    bool committed = false;

    void track(const std::string& p) { paths.push_back(p); }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }
};

fsgu::PlyFormat parse_format(const std::string& s) {
    if (s == "ascii") return fsgu::PlyFormat::Ascii;
    if (s == "binary") return fsgu::PlyFormat::BinaryLittleEndian;
    throw CLI::ValidationError("--format must be 'ascii' or 'binary'");
}

fsgu::PlyPrecision parse_precision(int bits) {
    if (bits == 32) return fsgu::PlyPrecision::Float32;
    if (bits == 64) return fsgu::PlyPrecision::Float64;
    throw CLI::ValidationError("--precision must be 32 or 64");
}

fsgu::Aggregation parse_aggregation(const std::string& s) {
    if (s == "mean-norm") return fsgu::Aggregation::MeanNorm;
    if (s == "rms") return fsgu::Aggregation::Rms;
    throw CLI::ValidationError("--aggregation must be 'mean-norm' or 'rms'");
}

int parse_grid(const std::string& s) {
    if (s == "auto") return 0;
    int g = 0;
    try {
        g = std::stoi(s);
    } catch (...) {
        throw CLI::ValidationError("--grid must be a positive integer or 'auto'");
    }
    if (g < 1) throw CLI::ValidationError("--grid must be a positive integer or 'auto'");
    return g;
}

void add_model_flags(CLI::App* cmd, fsgu::UpsampleConfig& cfg, std::string& grid) {
    cmd->add_option("--grid", grid, "Dice resolution per axis, or 'auto'")->capture_default_str();
    cmd->add_option("--kmax", cfg.model.k_max, "Frequencies per axis in the dictionary")->capture_default_str();
    cmd->add_option("--max-iter", cfg.model.max_iter, "Model fitting iteration cap")->capture_default_str();
    cmd->add_option("--gamma", cfg.model.gamma, "Coefficient step damping in (0,1]")->capture_default_str();
    cmd->add_option("--rho", cfg.model.rho, "Spatial weighting decay in (0,1)")->capture_default_str();
    cmd->add_option("--rho-f", cfg.model.rho_f, "Spectral weighting decay in (0,1]")->capture_default_str();
    cmd->add_option("--min-block-points", cfg.min_block_points, "Smallest block that gets upsampled")
        ->capture_default_str();
    cmd->add_option("--clamp-margin", cfg.clamp_margin, "Height clamp band as a fraction of the block q-range")
        ->capture_default_str();
}

void setup_config_io(CLI::App* cmd, std::string& save_path) {
    cmd->set_config("--config", "", "Read options from a key=value file");
    cmd->add_option("--save-config", save_path, "Write the effective options to a key=value file")
        ->configurable(false);
    cmd->allow_config_extras(false);
}

void maybe_save_config(CLI::App* cmd, const std::string& save_path) {
    if (save_path.empty()) return;
    std::ofstream f(save_path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + save_path + "'");
    f << cmd->config_to_str(true, false);
}

// ---------------------------------------------------------------------------
// upsample

struct UpsampleArgs {
    std::string input, output, report_path, grid = "auto", save_config;
    std::string format = "binary";
    int precision = 64;
    bool timing = false;
    fsgu::UpsampleConfig cfg;
};

int run_upsample(CLI::App* cmd, UpsampleArgs& args) {
    maybe_save_config(cmd, args.save_config);
    args.cfg.grid_resolution = parse_grid(args.grid);
    args.cfg.validate();

    OutputGuard guard;
    const auto start = Clock::now();

    const fsgu::PointCloud original = fsgu::read_ply(args.input);
    auto [normalized, transform] = fsgu::normalize_unit_cube(original);
    const fsgu::UpsampleResult result = fsgu::upsample_cloud(normalized, args.cfg);
    const fsgu::PointCloud restored = fsgu::denormalize(result.cloud, transform);

    guard.track(args.output);
    fsgu::write_ply(restored, args.output, parse_format(args.format), parse_precision(args.precision));

    const double ms = elapsed_ms(start);
    fsgu::RunInfo info{args.input, args.output, original.size(), args.timing ? ms : -1.0};
    if (!args.report_path.empty()) {
        guard.track(args.report_path);
        fsgu::write_json_file(args.report_path, fsgu::upsample_run_report(result, args.cfg, info));
    }
    guard.committed = true;

    std::cout << "upsampled " << original.size() << " -> " << restored.size() << " points (requested "
              << (original.size() + result.requested_new) << ", shortfall " << result.shortfall << ") in "
              << format_double(ms) << " ms\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string test, ref, report_path, aggregation = "mean-norm", save_config;
    std::size_t normals_k = 16;
};

int run_evaluate(CLI::App* cmd, EvaluateArgs& args) {
    maybe_save_config(cmd, args.save_config);
    fsgu::MetricOptions options;
    options.aggregation = parse_aggregation(args.aggregation);
    options.normals_k = args.normals_k;

    const fsgu::PointCloud test = fsgu::read_ply(args.test);
    const fsgu::PointCloud ref = fsgu::read_ply(args.ref);

    // Both clouds share the reference's unit-cube frame so the errors are
    // comparable across inputs.
    auto [ref_n, transform] = fsgu::normalize_unit_cube(ref);
    fsgu::PointCloud test_n;
    test_n.points.reserve(test.size());
    for (const fsgu::Vec3& p : test.points) test_n.points.push_back(transform.forward(p));
    test_n.normals = test.normals;

    const fsgu::MetricReport report = fsgu::metric_report(test_n, ref_n, options);
    std::cout << fsgu::metric_report_text(report);
    if (!args.report_path.empty()) {
        fsgu::write_json_file(args.report_path, fsgu::metric_report_json(report));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string shape = "plane", output, save_config;
    std::string format = "binary";
    int precision = 64;
    fsgu::SyntheticSpec spec;
};

int run_synth(CLI::App* cmd, SynthArgs& args) {
    maybe_save_config(cmd, args.save_config);
    args.spec.shape = fsgu::parse_shape(args.shape);
    OutputGuard guard;
    const fsgu::PointCloud cloud = fsgu::generate_synthetic(args.spec);
    guard.track(args.output);
    fsgu::write_ply(cloud, args.output, parse_format(args.format), parse_precision(args.precision));
    guard.committed = true;
    std::cout << "wrote " << cloud.size() << " points to " << args.output << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string manifest, csv_path, json_path, aggregation = "mean-norm", grid = "auto", save_config;
    std::vector<double> sweep_gamma, sweep_rho, sweep_rho_f;
    fsgu::UpsampleConfig cfg;
};

struct ManifestRow {
    std::string path;
    double scale = 2.0;
};

std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read manifest '" + path + "'");
    std::vector<ManifestRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected '<ply-path>,<scale>'");
        }
        ManifestRow row;
        row.path = line.substr(first, comma - first);
        while (!row.path.empty() && (row.path.back() == ' ' || row.path.back() == '\t')) row.path.pop_back();
        try {
            row.scale = std::stod(line.substr(comma + 1));
        } catch (...) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) + ": bad scale");
        }
        if (!(row.scale > 1.0)) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) + ": scale must be > 1");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Every (N/M)-th point, generalized to fractional strides: index j maps to
// floor(j*N/M). Deterministic and density-preserving.
fsgu::PointCloud stride_downsample(const fsgu::PointCloud& cloud, double scale) {
    const std::size_t n = cloud.size();
    const std::size_t m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(n) / scale)));
    fsgu::PointCloud out;
    out.points.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        out.points.push_back(cloud.points[j * n / m]);
    }
    return out;
}

int run_bench(CLI::App* cmd, BenchArgs& args) {
    maybe_save_config(cmd, args.save_config);
    args.cfg.grid_resolution = parse_grid(args.grid);
    const fsgu::Aggregation agg = parse_aggregation(args.aggregation);
    const std::vector<ManifestRow> manifest = read_manifest(args.manifest);

    if (args.sweep_gamma.empty()) args.sweep_gamma = {args.cfg.model.gamma};
    if (args.sweep_rho.empty()) args.sweep_rho = {args.cfg.model.rho};
    if (args.sweep_rho_f.empty()) args.sweep_rho_f = {args.cfg.model.rho_f};

    std::string csv = "cloud,scale,gamma,rho,rho_f,n_ref,n_in,n_out,p2point,p2plane,runtime_ms,status\n";
    fsgu::json records = fsgu::json::array();

    for (const ManifestRow& row : manifest) {
        for (double gamma : args.sweep_gamma) {
            for (double rho : args.sweep_rho) {
                for (double rho_f : args.sweep_rho_f) {
                    fsgu::UpsampleConfig cfg = args.cfg;
                    cfg.scale = row.scale;
                    cfg.model.gamma = gamma;
                    cfg.model.rho = rho;
                    cfg.model.rho_f = rho_f;

                    const std::string cloud_name = std::filesystem::path(row.path).stem().string();
                    fsgu::json record;
                    record["cloud"] = cloud_name;
                    record["scale"] = row.scale;
                    record["gamma"] = gamma;
                    record["rho"] = rho;
                    record["rho_f"] = rho_f;

                    const auto start = Clock::now();
                    try {
                        const fsgu::PointCloud reference = fsgu::read_ply(row.path);
                        auto [ref_n, transform] = fsgu::normalize_unit_cube(reference);
                        const fsgu::PointCloud input = stride_downsample(ref_n, row.scale);
                        cfg.validate();
                        const fsgu::UpsampleResult up = fsgu::upsample_cloud(input, cfg);
                        fsgu::MetricOptions options;
                        options.aggregation = agg;
                        const fsgu::MetricReport mr = fsgu::metric_report(up.cloud, ref_n, options);
                        const double ms = elapsed_ms(start);

                        char runtime[32];
                        std::snprintf(runtime, sizeof(runtime), "%.3f", ms);
                        csv += cloud_name + "," + format_double(row.scale) + "," + format_double(gamma) + "," +
                               format_double(rho) + "," + format_double(rho_f) + "," +
                               std::to_string(reference.size()) + "," + std::to_string(input.size()) + "," +
                               std::to_string(up.cloud.size()) + "," + format_double(mr.p2point_sym) + "," +
                               format_double(mr.p2plane_sym) + "," + runtime + ",ok\n";

                        record["n_ref"] = reference.size();
                        record["n_in"] = input.size();
                        record["n_out"] = up.cloud.size();
                        record["shortfall"] = up.shortfall;
                        record["metrics"] = fsgu::metric_report_json(mr);
                        record["runtime_ms"] = ms;
                        record["status"] = "ok";
                    } catch (const std::exception& e) {
                        csv += cloud_name + "," + format_double(row.scale) + "," + format_double(gamma) + "," +
                               format_double(rho) + "," + format_double(rho_f) + ",,,,,,," +
                               "error\n";
                        record["status"] = "error";
                        record["error"] = e.what();
                        std::cerr << "fsgu: bench row failed (" << row.path << ", scale "
                                  << format_double(row.scale) << "): " << e.what() << "\n";
                    }
                    records.push_back(record);
                }
            }
        }
    }

    if (!args.csv_path.empty()) {
        std::ofstream f(args.csv_path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write '" + args.csv_path + "'");
        f << csv;
    } else {
        std::cout << csv;
    }
    if (!args.json_path.empty()) {
        fsgu::write_json_file(args.json_path, records);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-selective geometry upsampling toolkit"};
    app.require_subcommand(1);

    UpsampleArgs up;
    CLI::App* up_cmd = app.add_subcommand("upsample", "Insert new points on locally fitted frequency models");
    up_cmd->add_option("--input", up.input, "Input PLY")->required();
    up_cmd->add_option("--output", up.output, "Output PLY")->required();
    up_cmd->add_option("--scale", up.cfg.scale, "Target output/input point ratio (> 1)")->capture_default_str();
    add_model_flags(up_cmd, up.cfg, up.grid);
    up_cmd->add_option("--format", up.format, "Output encoding: ascii or binary")->capture_default_str();
    up_cmd->add_option("--precision", up.precision, "Coordinate width: 32 or 64")->capture_default_str();
    up_cmd->add_option("--report", up.report_path, "Write a JSON run report here");
    up_cmd->add_flag("--timing", up.timing, "Include wall time in the JSON report (breaks byte-reproducibility)");
    setup_config_io(up_cmd, up.save_config);

    EvaluateArgs ev;
    CLI::App* ev_cmd = app.add_subcommand("evaluate", "P2Point / P2Plane distortion between two clouds");
    ev_cmd->add_option("--test", ev.test, "Cloud under test (PLY)")->required();
    ev_cmd->add_option("--ref", ev.ref, "Reference cloud (PLY)")->required();
    ev_cmd->add_option("--aggregation", ev.aggregation, "mean-norm or rms")->capture_default_str();
    ev_cmd->add_option("--normals-k", ev.normals_k, "Neighborhood size for estimated reference normals")
        ->capture_default_str();
    ev_cmd->add_option("--report", ev.report_path, "Write the metric report as JSON here");
    setup_config_io(ev_cmd, ev.save_config);

    SynthArgs sy;
    CLI::App* sy_cmd = app.add_subcommand("synth", "Sample an analytic surface with exact normals");
    sy_cmd->add_option("--shape", sy.shape, "plane, cosine-surface or sphere-patch")->capture_default_str();
    sy_cmd->add_option("--output", sy.output, "Output PLY")->required();
    sy_cmd->add_option("--n", sy.spec.n_points, "Number of points")->capture_default_str();
    sy_cmd->add_option("--seed", sy.spec.seed, "Sampling seed")->capture_default_str();
    sy_cmd->add_option("--height", sy.spec.plane_height, "Plane height z")->capture_default_str();
    sy_cmd->add_option("--offset", sy.spec.cosine_offset, "Cosine surface mean height")->capture_default_str();
    sy_cmd->add_option("--amplitude", sy.spec.cosine_amplitude, "Cosine surface amplitude")->capture_default_str();
    sy_cmd->add_option("--frequency", sy.spec.cosine_frequency, "Cosine surface frequency")->capture_default_str();
    sy_cmd->add_option("--radius", sy.spec.sphere_radius, "Sphere radius")->capture_default_str();
    sy_cmd->add_option("--cap-angle", sy.spec.sphere_cap_angle_deg, "Spherical cap angle, degrees")
        ->capture_default_str();
    sy_cmd->add_option("--format", sy.format, "Output encoding: ascii or binary")->capture_default_str();
    sy_cmd->add_option("--precision", sy.precision, "Coordinate width: 32 or 64")->capture_default_str();
    setup_config_io(sy_cmd, sy.save_config);

    BenchArgs be;
    CLI::App* be_cmd = app.add_subcommand("bench", "Downsample/upsample/evaluate a manifest of clouds");
    be_cmd->add_option("--manifest", be.manifest, "Lines of '<ply-path>,<scale>'")->required();
    be_cmd->add_option("--csv", be.csv_path, "CSV table output (stdout when omitted)");
    be_cmd->add_option("--json", be.json_path, "JSON sweep record output");
    be_cmd->add_option("--aggregation", be.aggregation, "mean-norm or rms")->capture_default_str();
    add_model_flags(be_cmd, be.cfg, be.grid);
    be_cmd->add_option("--sweep-gamma", be.sweep_gamma, "Gamma values to sweep")->delimiter(',');
    be_cmd->add_option("--sweep-rho", be.sweep_rho, "Rho values to sweep")->delimiter(',');
    be_cmd->add_option("--sweep-rho-f", be.sweep_rho_f, "Rho_f values to sweep")->delimiter(',');
    setup_config_io(be_cmd, be.save_config);

    CLI11_PARSE(app, argc, argv);

    try {
        if (up_cmd->parsed()) return run_upsample(up_cmd, up);
        if (ev_cmd->parsed()) return run_evaluate(ev_cmd, ev);
        if (sy_cmd->parsed()) return run_synth(sy_cmd, sy);
        if (be_cmd->parsed()) return run_bench(be_cmd, be);
    } catch (const std::exception& e) {
        std::cerr << "fsgu: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

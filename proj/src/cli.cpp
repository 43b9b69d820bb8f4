#include "combagg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "combagg/idla.hpp"
#include "combagg/render.hpp"
#include "combagg/rotor.hpp"
#include "combagg/sandpile.hpp"
#include "combagg/verify.hpp"
#include "json.hpp"

namespace combagg::cli {

namespace {

using nlohmann::json;

struct SimConfig {
    std::string model;
    std::optional<double> n;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<double> eps;
    std::optional<int> trials;
    std::optional<std::string> rotors;
    std::optional<std::string> graph;
    std::optional<std::string> schedule;
    std::optional<std::string> out;
    std::string format = "csv";
    int jobs = 1;
};

struct VerifyConfig {
    std::string check;
    verify::Overrides overrides;
    std::optional<std::string> out;
};

struct RenderConfig {
    std::string input;
    std::optional<std::string> overlay;
    std::optional<std::string> out;
    double cell = 4.0;
};

std::int64_t whole_count(double n, const std::string& model) {
    if (!(n >= 1.0) || n != std::floor(n) || n > 4e9)
        throw std::invalid_argument(model + ": --n must be a positive integer");
    return static_cast<std::int64_t>(n);
}

json extents_json(const Region& r) {
    if (r.empty()) return nullptr;
    std::int64_t x0 = INT64_MAX, x1 = INT64_MIN, y0 = INT64_MAX, y1 = INT64_MIN;
    r.for_each([&](Vertex v) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    });
    return {{"x_min", x0}, {"x_max", x1}, {"y_min", y0}, {"y_max", y1}};
}

// "run.csv" -> "run"; other names are kept whole.
std::string stem_of(const std::string& path) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size());
    return path;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open for writing: " + path);
    return f;
}

template <class Writer>
void write_file(const std::string& path, Writer&& w) {
    auto f = open_out(path);
    w(f);
    if (!f) throw std::runtime_error("write failed: " + path);
}

void reject_unused(const SimConfig& c) {
    auto no = [&](bool set, const char* flag) {
        if (set) throw std::invalid_argument(std::string(flag) + " does not apply to sim " + c.model);
    };
    if (c.model == "sandpile") {
        no(c.seed.has_value(), "--seed");
        no(c.eps.has_value(), "--eps");
        no(c.trials.has_value(), "--trials");
        no(c.rotors.has_value(), "--rotors");
    } else if (c.model == "idla") {
        no(c.tol.has_value(), "--tol");
        no(c.rotors.has_value(), "--rotors");
        no(c.graph.has_value(), "--graph");
        no(c.schedule.has_value(), "--schedule");
    } else {
        no(c.seed.has_value(), "--seed");
        no(c.tol.has_value(), "--tol");
        no(c.eps.has_value(), "--eps");
        no(c.trials.has_value(), "--trials");
        no(c.schedule.has_value(), "--schedule");
    }
}

// Writes the cluster, side files and metadata.
void emit_sim(const SimConfig& c, const Region& cluster, json meta,
              const std::vector<std::pair<std::string, std::function<void(std::ostream&)>>>& sides,
              std::ostream& out) {
    meta["cluster_size"] = cluster.size();
    meta["extents"] = extents_json(cluster);
    if (c.out) {
        const std::string stem = stem_of(*c.out);
        write_file(*c.out, [&](std::ostream& f) { write_region_csv(f, cluster); });
        json files = {{"cluster", *c.out}};
        for (const auto& [suffix, writer] : sides) {
            const std::string path = stem + "." + suffix + ".csv";
            write_file(path, writer);
            files[suffix] = path;
        }
        meta["files"] = files;
        write_file(stem + ".json", [&](std::ostream& f) { f << meta.dump(2) << '\n'; });
        if (c.format == "json") out << meta.dump(2) << '\n';
        return;
    }
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& v : cluster.sorted_vertices()) rows.push_back({v.x, v.y});
        meta["cluster"] = rows;
        out << meta.dump(2) << '\n';
    } else {
        write_region_csv(out, cluster);
    }
}

int cmd_sim(const SimConfig& c, std::ostream& out) {
    reject_unused(c);
    if (!c.n) throw std::invalid_argument("sim " + c.model + ": --n is required");
    const auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };

    if (c.model == "sandpile") {
        const GraphKind kind = graph_kind_from_string(c.graph.value_or("comb"));
        if (!(*c.n > 0.0) || !std::isfinite(*c.n))
            throw std::invalid_argument("sandpile: --n must be positive");
        sandpile::RelaxOptions opt;
        if (c.tol) {
            if (!(*c.tol > 0.0)) throw std::invalid_argument("sandpile: --tol must be positive");
            opt.stop_tol = *c.tol;
        }
        if (c.schedule) opt.schedule = sandpile::schedule_from_string(*c.schedule);
        spdlog::info("sim sandpile n={} schedule={}", *c.n, sandpile::to_string(opt.schedule));
        auto res = sandpile::relax(sandpile::MassField::point(*c.n, kind), opt);
        json meta = {{"model", "sandpile"},       {"graph", to_string(kind)},
                     {"n", *c.n},                 {"seed", nullptr},
                     {"schedule", sandpile::to_string(opt.schedule)},
                     {"stop_tol", opt.stop_tol},  {"total_mass", res.mass.total()},
                     {"topplings", res.iterations}, {"residual_excess", res.residual_excess},
                     {"wall_ms", wall_ms()}};
        emit_sim(c, res.cluster, meta,
                 {{"odometer", [&](std::ostream& f) { sandpile::write_odometer_csv(f, res.odometer); }},
                  {"mass", [&](std::ostream& f) { sandpile::write_mass_csv(f, res.mass); }}},
                 out);
        return kExitOk;
    }

    if (c.model == "idla") {
        const std::int64_t n = whole_count(*c.n, "idla");
        const std::uint64_t seed = c.seed.value_or(1);
        if (c.trials) {
            if (*c.trials < 1) throw std::invalid_argument("idla: --trials must be >= 1");
            const double eps = c.eps.value_or(0.15);
            if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("idla: --eps must lie in [0, 1)");
            auto runs = idla::run_trials(n, eps, seed, *c.trials, c.jobs);
            json rows = json::array();
            int contained = 0;
            for (const auto& r : runs) {
                contained += r.contained ? 1 : 0;
                rows.push_back({{"seed", r.seed}, {"contained", r.contained}, {"fraction", r.fraction},
                                {"eps_threshold", r.eps_threshold}, {"wall_ms", r.wall_ms}});
            }
            json meta = {{"model", "idla"}, {"n", n},         {"first_seed", seed},
                         {"eps", eps},      {"trials", runs.size()}, {"contained", contained},
                         {"runs", rows},    {"wall_ms", wall_ms()}};
            if (c.out)
                write_file(*c.out, [&](std::ostream& f) { f << meta.dump(2) << '\n'; });
            else
                out << meta.dump(2) << '\n';
            return kExitOk;
        }
        if (c.eps) throw std::invalid_argument("idla: --eps needs --trials");
        spdlog::info("sim idla n={} seed={}", n, seed);
        auto run = idla::idla_run(n, seed);
        std::uint64_t steps = 0;
        for (auto s : run.steps) steps += s;
        json meta = {{"model", "idla"}, {"graph", "comb"}, {"n", n},         {"seed", seed},
                     {"steps", steps},  {"containment_threshold", idla::containment_threshold(run)},
                     {"wall_ms", wall_ms()}};
        emit_sim(c, run.cluster, meta, {}, out);
        return kExitOk;
    }

    const GraphKind kind = graph_kind_from_string(c.graph.value_or("comb"));
    const std::int64_t n = whole_count(*c.n, "rotor");
    const auto initial = rotor::RotorState::from_spec(c.rotors.value_or("all-first"), kind);
    spdlog::info("sim rotor n={} rotors={}", n, initial.name());
    auto run = rotor::rotor_aggregate(n, initial);
    json meta = {{"model", "rotor"}, {"graph", to_string(kind)}, {"n", n},
                 {"seed", nullptr},  {"rotors", initial.name()},  {"steps", run.steps},
                 {"wall_ms", wall_ms()}};
    emit_sim(c, run.cluster, meta,
             {{"odometer",
               [&](std::ostream& f) {
                   std::vector<std::pair<Vertex, double>> rows;
                   for (const auto& [v, m] : run.odometer) rows.emplace_back(v, static_cast<double>(m));
                   potential::write_field_csv(f, rows);
               }},
              {"rotors", [&](std::ostream& f) { rotor::write_rotor_csv(f, run.rotors); }}},
             out);
    return kExitOk;
}

int cmd_verify(const VerifyConfig& c, std::ostream& out) {
    spdlog::info("verify {}", c.check);
    const auto reports = verify::run_check(c.check, c.overrides);
    bool pass = true;
    json rs = json::array();
    for (const auto& r : reports) {
        pass = pass && r.pass;
        rs.push_back(verify::to_json(r));
    }
    json doc = {{"check", c.check}, {"pass", pass}, {"reports", rs}};
    if (c.out) write_file(*c.out, [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
    out << doc.dump(2) << '\n';
    return pass ? kExitOk : kExitFailure;
}

int cmd_render(const RenderConfig& c, std::ostream& out) {
    render::SvgOptions opt;
    if (!(c.cell > 0.0)) throw std::invalid_argument("render: --cell must be positive");
    opt.cell = c.cell;
    if (c.overlay) opt.overlay_n = render::parse_overlay(*c.overlay);
    const Region region = read_region_csv(c.input);
    if (c.out)
        render::write_svg(*c.out, region, opt);
    else
        render::write_svg(out, region, opt);
    return kExitOk;
}

}  // namespace

void configure_logging() {
    auto logger = spdlog::get("combagg");
    if (!logger) logger = spdlog::stderr_color_mt("combagg");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("AGG_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aggregation models on the comb lattice"};
    app.name("combagg");
    app.require_subcommand(1);

    SimConfig sim;
    auto* sim_cmd = app.add_subcommand("sim", "run one aggregation model");
    sim_cmd->add_option("model", sim.model, "sandpile, idla or rotor")
        ->required()
        ->check(CLI::IsMember({"sandpile", "idla", "rotor"}));
    sim_cmd->add_option("--n", sim.n, "mass or particle count");
    sim_cmd->add_option("--seed", sim.seed, "idla seed (first seed with --trials)");
    sim_cmd->add_option("--tol", sim.tol, "sandpile stopping tolerance on total excess");
    sim_cmd->add_option("--eps", sim.eps, "idla shrink factor for containment (with --trials)");
    sim_cmd->add_option("--trials", sim.trials, "idla: number of consecutive seeds");
    sim_cmd->add_option("--jobs", sim.jobs, "worker threads for --trials")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--rotors", sim.rotors, "all-first, toward-origin, random:SEED or file:PATH");
    sim_cmd->add_option("--graph", sim.graph, "comb or line")->check(CLI::IsMember({"comb", "line"}));
    sim_cmd->add_option("--schedule", sim.schedule, "sandpile schedule: sweep, queue or active-set");
    sim_cmd->add_option("--out", sim.out, "cluster CSV path; side files share its stem");
    sim_cmd->add_option("--format", sim.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));

    VerifyConfig ver;
    auto* ver_cmd = app.add_subcommand("verify", "run an acceptance check and print a JSON report");
    ver_cmd->add_option("check", ver.check)->required()->check(CLI::IsMember(verify::check_names()));
    ver_cmd->add_option("--n", ver.overrides.n);
    ver_cmd->add_option("--eps", ver.overrides.eps);
    ver_cmd->add_option("--trials", ver.overrides.trials);
    ver_cmd->add_option("--seed", ver.overrides.seed);
    ver_cmd->add_option("--tol", ver.overrides.tol);
    ver_cmd->add_option("--tmax", ver.overrides.t_max);
    ver_cmd->add_option("--rotors", ver.overrides.rotors);
    ver_cmd->add_option("--jobs", ver.overrides.jobs)->check(CLI::PositiveNumber);
    ver_cmd->add_option("--out", ver.out, "also write the report here");
    std::string ver_format = "json";
    ver_cmd->add_option("--format", ver_format, "json only")->check(CLI::IsMember({"json"}));

    RenderConfig ren;
    auto* ren_cmd = app.add_subcommand("render", "draw a cluster CSV as SVG");
    ren_cmd->add_option("input", ren.input, "CSV with header x,y")->required();
    ren_cmd->add_option("--overlay", ren.overlay, "ball:N outline");
    ren_cmd->add_option("--out", ren.out, "SVG path (stdout when absent)");
    ren_cmd->add_option("--cell", ren.cell, "pixels per lattice unit");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim_cmd->parsed()) return cmd_sim(sim, out);
        if (ver_cmd->parsed()) return cmd_verify(ver, out);
        return cmd_render(ren, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace combagg::cli

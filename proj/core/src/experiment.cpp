#include "pplab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "pplab/analysis.hpp"
#include "pplab/barrier.hpp"
#include "pplab/capacity.hpp"

namespace pplab {

namespace {

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

TaskKind task_kind_of(const std::string& name, int line) {
    if (name == "morrey") return TaskKind::Morrey;
    if (name == "capacity") return TaskKind::Capacity;
    if (name == "cdc") return TaskKind::Cdc;
    if (name == "solve") return TaskKind::Solve;
    if (name == "barrier") return TaskKind::Barrier;
    if (name == "holder") return TaskKind::Holder;
    if (name == "embed") return TaskKind::Embed;
    if (name == "wolff") return TaskKind::Wolff;
    if (name == "necessity") return TaskKind::Necessity;
    fail("config-parse", "unknown task kind '" + name + "' (line " + std::to_string(line) + ")");
}

// formatted so reruns are byte-for-byte identical
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    Csv(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) fail("bad-config", "cannot open output file '" + path + "'");
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

struct Manifest {
    std::vector<std::pair<std::string, std::string>> entries;
    void put(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
    void put(const std::string& key, double value) { entries.emplace_back(key, num(value)); }
    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) fail("bad-config", "cannot open manifest '" + path + "'");
        for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
    }
};

Domain2D domain_from_config(const ConfigFile& file) {
    auto it = file.tables.find("domain");
    if (it == file.tables.end()) fail("config-parse", "missing [domain] section");
    const ConfigTable& t = it->second;
    const std::string kind = t.text_or("kind", "square");

    Domain2D dom = Domain2D::unit_square();
    if (kind == "square") {
        dom = Domain2D::unit_square();
    } else if (kind == "lshape") {
        dom = Domain2D::l_shape();
    } else if (kind == "disk") {
        Point c{0, 0};
        if (t.has("center")) {
            const auto l = t.list("center");
            if (l.size() != 2) fail("config-parse", "domain center needs [x, y]");
            c = {l[0], l[1]};
        }
        dom = Domain2D::disk(c, t.number_or("radius", 1.0),
                             static_cast<int>(t.number_or("ngon", 256)));
    } else if (kind == "file") {
        dom = load_domain_file(t.text("path"));
    } else {
        fail("config-parse", "unknown domain kind '" + kind + "'");
    }

    if (t.has("gamma")) {
        bool all = false;
        if (t.values.at("gamma").kind == ConfigValue::Kind::String)
            all = t.text("gamma") == "all";
        if (!all) {
            std::vector<int> ids;
            for (double v : t.list("gamma")) ids.push_back(static_cast<int>(v));
            dom = dom.with_gamma(ids);
        }
    }
    return dom;
}

RadonCharge charge_from_table(const ConfigTable& t) {
    const std::string kind = t.text_or("kind", "lebesgue");
    const bool negative = t.boolean_or("negative", false);
    RadonCharge nu;
    if (kind == "lebesgue") {
        DensityComponent d;
        d.amplitude = t.number_or("amplitude", 1.0);
        d.gamma_exponent = t.number_or("weight_t", 0.0);
        nu.add(d, negative);
        nu.set_declared_q(d.gamma_exponent > 0 ? 2.0 / d.gamma_exponent : kInfinity);
    } else if (kind == "density") {
        DensityComponent d;
        d.amplitude = t.number_or("amplitude", 1.0);
        const std::string profile = t.text_or("profile", "constant");
        if (profile == "x")
            d.profile = DensityProfile::CoordX;
        else if (profile == "y")
            d.profile = DensityProfile::CoordY;
        else if (profile != "constant")
            fail("config-parse", "unknown density profile '" + profile + "'");
        if (t.has("support")) {
            const auto l = t.list("support");
            if (l.size() != 4) fail("config-parse", "support needs [xmin, ymin, xmax, ymax]");
            d.support = Rect{l[0], l[1], l[2], l[3]};
        }
        d.gamma_exponent = t.number_or("weight_t", 0.0);
        d.min_gamma_dist = t.number_or("min_gamma_dist", 0.0);
        nu.add(d, negative);
        nu.set_declared_q(d.gamma_exponent > 0 ? 2.0 / d.gamma_exponent : kInfinity);
    } else if (kind == "segment") {
        const auto a = t.list("a");
        const auto b = t.list("b");
        if (a.size() != 2 || b.size() != 2) fail("config-parse", "segment needs a=[x,y], b=[x,y]");
        SegmentComponent s;
        s.a = {a[0], a[1]};
        s.b = {b[0], b[1]};
        s.rho0 = t.number_or("rho0", 1.0);
        s.rho1 = t.number_or("rho1", s.rho0);
        s.gamma_exponent = t.number_or("weight_t", 0.0);
        nu.add(s, negative);
        nu.set_declared_q(s.gamma_exponent > 0 ? 2.0 / (1.0 + s.gamma_exponent) : 2.0);
    } else if (kind == "atom") {
        const auto at = t.list("at");
        if (at.size() != 2) fail("config-parse", "atom needs at=[x,y]");
        nu.add(AtomComponent{{at[0], at[1]}, t.number_or("mass", 1.0), 0.0}, negative);
        nu.set_declared_q(1.0);
    } else {
        fail("config-parse", "unknown charge kind '" + kind + "'");
    }
    return nu;
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config-parse", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path);
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text, const std::string& name) {
    const ConfigFile file = ConfigFile::parse(text, name);

    ExperimentConfig cfg;
    cfg.source = name;
    cfg.hash = fnv1a_hex(text);
    cfg.domain = domain_from_config(file);
    cfg.seed = static_cast<std::uint64_t>(file.root.number_or("seed", 1));
    cfg.output = file.root.text_or("output", "out");

    if (auto it = file.tables.find("operator"); it != file.tables.end()) {
        cfg.p = it->second.number_or("p", 2.0);
        const std::string kind = it->second.text_or("kind", "p-laplacian");
        if (kind != "p-laplacian")
            fail("config-parse", "only the p-laplacian operator is configurable here");
    }
    if (!(cfg.p > 1) || !(cfg.p <= 2)) fail("config-parse", "operator p must lie in (1, 2]");

    if (auto it = file.arrays.find("charge"); it != file.arrays.end())
        cfg.charge_tables = it->second;

    if (auto it = file.tables.find("mesh"); it != file.tables.end())
        cfg.mesh_levels = it->second.list("levels");
    if (cfg.mesh_levels.empty()) cfg.mesh_levels = {1.0 / 16};
    for (std::size_t i = 0; i + 1 < cfg.mesh_levels.size(); ++i)
        if (!(cfg.mesh_levels[i] > cfg.mesh_levels[i + 1]))
            fail("config-parse", "mesh levels must be strictly decreasing in h");
    for (double h : cfg.mesh_levels)
        if (!(h > 0)) fail("config-parse", "mesh levels must be positive");

    auto it = file.arrays.find("task");
    if (it == file.arrays.end() || it->second.empty())
        fail("config-parse", "config declares no [[task]]");
    for (const ConfigTable& t : it->second)
        cfg.tasks.push_back({task_kind_of(t.text("kind"), t.line), t});

    // per-kind required fields, validated up front
    for (const TaskSpec& task : cfg.tasks) {
        switch (task.kind) {
            case TaskKind::Morrey:
                task.params.number("q");
                break;
            case TaskKind::Capacity:
                task.params.text("k_kind");
                break;
            case TaskKind::Holder:
                task.params.number("beta1");
                break;
            case TaskKind::Necessity:
                task.params.number("beta");
                break;
            case TaskKind::Wolff:
                task.params.list("x");
                break;
            default:
                break;
        }
    }
    return cfg;
}

RadonCharge ExperimentConfig::build_charge(std::size_t index) const {
    if (index >= charge_tables.size()) fail("config-parse", "charge index out of range");
    return charge_from_table(charge_tables[index]);
}

RadonCharge ExperimentConfig::build_combined_charge() const {
    RadonCharge nu;
    std::optional<double> declared;
    for (std::size_t i = 0; i < charge_tables.size(); ++i) {
        const RadonCharge c = build_charge(i);
        declared = i == 0 ? c.declared_q() : std::nullopt;
        nu = nu + c;
    }
    if (charge_tables.size() == 1 && declared) nu.set_declared_q(*declared);
    return nu;
}

namespace {

struct LevelContext {
    const ExperimentConfig& cfg;
    const RunOptions& opts;
    int level;
    double target_h;
    std::shared_ptr<const TriMesh> mesh;
    std::string dir;
    Manifest manifest;
    std::ostringstream log;

    std::string file(const std::string& stem) const {
        return dir + "/" + stem + "_L" + std::to_string(level) + ".csv";
    }
};

void run_morrey(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "morrey" + std::to_string(tidx);
    const double q = t.number("q");
    const std::string mode_s = t.text_or("mode", "floated");
    const MorreyMode mode = mode_s == "global" ? MorreyMode::Global : MorreyMode::Floated;
    const double beta = beta_exponent(ctx.cfg.p, q, 2);

    Csv csv(ctx.file(tag), {"charge", "q", "mode", "value", "witness_x", "witness_y", "witness_r",
                            "divergent", "samples", "skipped_centers", "beta"});
    const ScanSpec scan = ScanSpec::defaults(ctx.cfg.domain, ctx.mesh.get());
    for (std::size_t i = 0; i < ctx.cfg.charge_tables.size(); ++i) {
        const RadonCharge nu = ctx.cfg.build_charge(i);
        const MorreyReport rep = morrey_norm(nu, q, mode, ctx.cfg.domain, scan);
        csv.row({std::to_string(i), num(q), mode_s, num(rep.value), num(rep.witness_center.x),
                 num(rep.witness_center.y), num(rep.witness_radius),
                 rep.divergent ? "1" : "0", std::to_string(rep.samples),
                 std::to_string(rep.skipped_centers), num(beta)});
        ctx.manifest.put(tag + "_value_c" + std::to_string(i), rep.value);
    }
    ctx.manifest.put(tag + "_beta", beta);
}

void run_capacity(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "capacity" + std::to_string(tidx);
    const std::string kk = t.text("k_kind");
    Compact2D K = Compact2D::empty();
    if (kk == "disk") {
        const auto c = t.list("k_center");
        if (c.size() != 2) fail("config-parse", "k_center needs [x,y]");
        K = Compact2D::disk({c[0], c[1]}, t.number("k_radius"),
                            static_cast<int>(t.number_or("k_ngon", 256)));
    } else if (kk == "rect") {
        const auto r = t.list("k_rect");
        if (r.size() != 4) fail("config-parse", "k_rect needs [xmin,ymin,xmax,ymax]");
        K = Compact2D::polygon({{r[0], r[1]}, {r[2], r[1]}, {r[2], r[3]}, {r[0], r[3]}});
    } else if (kk != "empty") {
        fail("config-parse", "unknown condenser kind '" + kk + "'");
    }
    const std::string mode_s = t.text_or("constraint", "cover");
    const CondenserConstraint mode =
        mode_s == "nodes" ? CondenserConstraint::NodesOnly : CondenserConstraint::CoverTriangles;

    const CapacityReport rep = capacity(K, ctx.cfg.domain, ctx.cfg.p, ctx.target_h, mode);
    Csv csv(ctx.file(tag), {"value", "mesh_h", "p", "constrained_nodes"});
    csv.row({num(rep.value), num(rep.mesh_h), num(rep.p), std::to_string(rep.constrained_nodes)});
    ctx.manifest.put(tag + "_value", rep.value);
}

void run_cdc(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "cdc" + std::to_string(tidx);
    std::vector<double> radii;
    if (t.has("radii")) {
        radii = t.list("radii");
    } else {
        const int levels = static_cast<int>(t.number_or("levels", 4));
        for (int j = 1; j <= levels; ++j)
            radii.push_back(ctx.cfg.domain.diameter() * std::pow(2.0, -j - 1));
    }
    const int samples = static_cast<int>(t.number_or("samples", 16));
    const CdcReport rep = cdc_check(ctx.cfg.domain, ctx.cfg.p, radii, samples);

    Csv csv(ctx.file(tag), {"xi_x", "xi_y", "R", "num", "den", "ratio", "flags"});
    for (const CdcSample& s : rep.samples)
        csv.row({num(s.xi.x), num(s.xi.y), num(s.R), num(s.numerator), num(s.denominator),
                 num(s.ratio), s.under_resolved ? "under-resolved" : ""});
    ctx.manifest.put(tag + "_gamma", rep.gamma_estimate);
}

void run_solve(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "solve" + std::to_string(tidx);
    const RadonCharge nu = ctx.cfg.build_combined_charge();
    SolveConfig scfg;
    scfg.record_energy = true;
    const EllipticOperator op = EllipticOperator::p_laplacian(ctx.cfg.p);
    const ScalarField u = solve_dirichlet(op, nu, ctx.mesh, scfg);

    for (std::size_t i = 0; i < u.meta.energy_trace.size(); ++i)
        ctx.log << tag << " iter " << i + 1 << " energy " << num(u.meta.energy_trace[i]) << "\n";
    ctx.log << tag << " residual " << num(u.meta.residual) << " iterations "
            << u.meta.iterations << "\n";

    Csv csv(ctx.file(tag), {"x", "y", "value"});
    for (int i = 0; i < ctx.mesh->node_count(); ++i) {
        const Point pnt = ctx.mesh->nodes()[static_cast<std::size_t>(i)];
        csv.row({num(pnt.x), num(pnt.y), num(u[i])});
    }
    ctx.manifest.put(tag + "_energy", u.meta.energy);
    ctx.manifest.put(tag + "_residual", u.meta.residual);
    ctx.manifest.put(tag + "_iterations", static_cast<double>(u.meta.iterations));
    ctx.manifest.put(tag + "_max", u.max_value());

    if (t.text_or("oracle", "") == "disk-radial") {
        // exact radial profile for -Δ_p u = c on a disk centered at the origin
        const double amp = ctx.cfg.charge_tables.empty()
                               ? 1.0
                               : ctx.cfg.charge_tables[0].number_or("amplitude", 1.0);
        const double p = ctx.cfg.p;
        const double radius = 1.0;
        double linf = 0;
        for (int i = 0; i < ctx.mesh->node_count(); ++i) {
            const Point pnt = ctx.mesh->nodes()[static_cast<std::size_t>(i)];
            const double r = norm(pnt);
            const double exact = (p - 1) / p * std::pow(amp / 2.0, 1 / (p - 1)) *
                                 (std::pow(radius, p / (p - 1)) - std::pow(r, p / (p - 1)));
            linf = std::max(linf, std::abs(u[i] - exact));
        }
        const double umax = (p - 1) / p * std::pow(amp / 2.0, 1 / (p - 1));
        ctx.manifest.put(tag + "_linf_error", linf);
        ctx.manifest.put(tag + "_linf_rel", linf / umax);
        if (t.has("oracle_tol") && linf / umax > t.number("oracle_tol"))
            fail("oracle-tolerance", tag + " radial error " + num(linf / umax) +
                                         " exceeds " + num(t.number("oracle_tol")));
    }
}

void run_barrier(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "barrier" + std::to_string(tidx);
    BarrierConfig bcfg;
    bcfg.theta = t.number_or("theta", 0.25);
    bcfg.beta0 = t.number_or("beta0", 0.25);
    bcfg.k_min = static_cast<int>(t.number_or("k_min", 0));
    bcfg.k_max = static_cast<int>(t.number_or("k_max", 4));
    bcfg.covering_overlap = t.number_or("overlap", 1.5);
    bcfg.probe_stations = static_cast<int>(t.number_or("stations", 48));
    bcfg.strict_decay_check = t.boolean_or("strict_decay", false);

    const RadonCharge nu = ctx.cfg.build_combined_charge();
    const BarrierResult res = build_barrier(ctx.cfg.domain, nu,
                                            EllipticOperator::p_laplacian(ctx.cfg.p), bcfg,
                                            ctx.mesh);

    Csv csv(ctx.file(tag), {"x", "y", "dist_gamma", "s", "ratio"});
    for (const BarrierProbe& probe : res.probes)
        csv.row({num(probe.x.x), num(probe.x.y), num(probe.dist_gamma), num(probe.s),
                 num(probe.s / std::pow(probe.dist_gamma, bcfg.beta0))});
    Csv shells(ctx.file(tag + "_shells"), {"k", "xi_x", "xi_y", "radius"});
    for (std::size_t k = 0; k < res.shells.size(); ++k)
        for (const ShellBall& b : res.shells[k])
            shells.row({std::to_string(static_cast<int>(k) + bcfg.k_min), num(b.xi.x),
                        num(b.xi.y), num(b.radius)});

    ctx.manifest.put(tag + "_beta0", bcfg.beta0);
    ctx.manifest.put(tag + "_bound_constant", res.bound_constant);
    ctx.manifest.put(tag + "_slope", res.fitted_slope);
    ctx.manifest.put(tag + "_decay_violations", static_cast<double>(res.decay_violations));
}

void run_holder(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "holder" + std::to_string(tidx);
    const double beta1 = t.number("beta1");
    const double q = t.number_or("q", kInfinity);
    const RadonCharge nu = ctx.cfg.build_combined_charge();
    const ScalarField u =
        solve_dirichlet(EllipticOperator::p_laplacian(ctx.cfg.p), nu, ctx.mesh);
    const HolderReport rep = holder_seminorm(u, beta1);

    const ScanSpec scan = ScanSpec::defaults(ctx.cfg.domain, ctx.mesh.get());
    const MorreyReport norm = morrey_norm(nu, q, MorreyMode::Floated, ctx.cfg.domain, scan);
    const double beta = beta_exponent(ctx.cfg.p, q, 2);
    const double factor = std::pow(ctx.cfg.domain.diameter(), beta - beta1) *
                          std::pow(norm.value, 1 / (ctx.cfg.p - 1));
    const double c_emp = factor > 0 ? rep.seminorm / factor : 0;

    Csv csv(ctx.file(tag), {"beta1", "seminorm", "witness_ax", "witness_ay", "witness_bx",
                            "witness_by", "norm", "empirical_c"});
    csv.row({num(beta1), num(rep.seminorm), num(rep.witness_a.x), num(rep.witness_a.y),
             num(rep.witness_b.x), num(rep.witness_b.y), num(norm.value), num(c_emp)});
    ctx.manifest.put(tag + "_seminorm", rep.seminorm);
    ctx.manifest.put(tag + "_C", c_emp);
}

void run_embed(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "embed" + std::to_string(tidx);
    const int trials = static_cast<int>(t.number_or("trials", 5));
    const RadonCharge nu = ctx.cfg.build_combined_charge();
    const EmbeddingReport rep = embedding_bounds(nu, ctx.mesh, ctx.cfg.p, trials, ctx.cfg.seed);

    Csv csv(ctx.file(tag), {"rayleigh_lower", "picone_upper", "gap", "consistent"});
    csv.row({num(rep.rayleigh_lower), num(rep.picone_upper), num(rep.gap),
             rep.consistent ? "1" : "0"});
    ctx.manifest.put(tag + "_lower", rep.rayleigh_lower);
    ctx.manifest.put(tag + "_upper", rep.picone_upper);
    if (!rep.consistent)
        fail("embedding-consistency", tag + ": rayleigh lower bound exceeds the Picone upper bound");
}

void run_wolff(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "wolff" + std::to_string(tidx);
    const auto x = t.list("x");
    if (x.size() != 2) fail("config-parse", "wolff needs x=[x,y]");
    const double R = t.number_or("R", 2 * ctx.cfg.domain.diameter());
    const int levels = static_cast<int>(t.number_or("levels", 20));
    const RadonCharge nu = ctx.cfg.build_combined_charge();
    const WolffValue w = wolff_potential(nu, {x[0], x[1]}, ctx.cfg.p, R, levels, ctx.cfg.domain);

    Csv csv(ctx.file(tag), {"x", "y", "R", "levels", "value", "divergent_at_atom"});
    csv.row({num(x[0]), num(x[1]), num(R), std::to_string(levels), num(w.value),
             w.divergent_at_atom ? "1" : "0"});
    ctx.manifest.put(tag + "_value", w.value);
}

void run_necessity(LevelContext& ctx, int tidx, const ConfigTable& t) {
    const std::string tag = "necessity" + std::to_string(tidx);
    const double beta = t.number("beta");
    const RadonCharge nu = ctx.cfg.build_combined_charge();
    const ScalarField u =
        solve_dirichlet(EllipticOperator::p_laplacian(ctx.cfg.p), nu, ctx.mesh);
    const NecessityReport rep = necessity_check(u, nu, beta, ctx.cfg.p, ctx.cfg.domain);

    Csv csv(ctx.file(tag), {"q", "norm_lhs", "holder_rhs", "empirical_c", "beta"});
    csv.row({num(rep.q), num(rep.norm_lhs), num(rep.holder_rhs), num(rep.empirical_c),
             num(rep.beta)});
    ctx.manifest.put(tag + "_C", rep.empirical_c);
}

// runs every task at one level; returns "" on success, else the violation text
std::string run_level(const ExperimentConfig& cfg, const RunOptions& opts, int level,
                      std::string dir, std::ostringstream& log) {
    try {
        LevelContext ctx{cfg, opts, level, cfg.mesh_levels[static_cast<std::size_t>(level)],
                         nullptr, std::move(dir), {}, {}};
        ctx.mesh = std::make_shared<TriMesh>(build_mesh(cfg.domain, ctx.target_h));

        ctx.manifest.put("config", cfg.source);
        ctx.manifest.put("config_hash", cfg.hash);
        ctx.manifest.put("version", kVersion);
        ctx.manifest.put("level", static_cast<double>(level));
        ctx.manifest.put("target_h", ctx.target_h);
        ctx.manifest.put("seed", static_cast<double>(cfg.seed));
        ctx.manifest.put("p", cfg.p);

        for (std::size_t t = 0; t < cfg.tasks.size(); ++t) {
            const TaskSpec& task = cfg.tasks[t];
            const int tidx = static_cast<int>(t);
            switch (task.kind) {
                case TaskKind::Morrey: run_morrey(ctx, tidx, task.params); break;
                case TaskKind::Capacity: run_capacity(ctx, tidx, task.params); break;
                case TaskKind::Cdc: run_cdc(ctx, tidx, task.params); break;
                case TaskKind::Solve: run_solve(ctx, tidx, task.params); break;
                case TaskKind::Barrier: run_barrier(ctx, tidx, task.params); break;
                case TaskKind::Holder: run_holder(ctx, tidx, task.params); break;
                case TaskKind::Embed: run_embed(ctx, tidx, task.params); break;
                case TaskKind::Wolff: run_wolff(ctx, tidx, task.params); break;
                case TaskKind::Necessity: run_necessity(ctx, tidx, task.params); break;
            }
        }
        ctx.manifest.write(ctx.dir + "/manifest_L" + std::to_string(level) + ".txt");
        log << ctx.log.str();
        return "";
    } catch (const Error& e) {
        return e.label() + ": " + e.what();
    }
}

} // namespace

int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
    std::string root = options.output_root;
    if (root.empty()) {
        const char* env = std::getenv(kOutputRootEnv);
        root = env != nullptr ? env : ".";
    }
    const std::string dir = root + "/" + config.output;
    std::filesystem::create_directories(dir);

    const int levels = static_cast<int>(config.mesh_levels.size());
    std::vector<std::string> violations(static_cast<std::size_t>(levels));
    std::vector<std::ostringstream> logs(static_cast<std::size_t>(levels));

    const int threads =
        options.deterministic ? 1 : std::max(1, std::min(options.threads, levels));
    if (threads <= 1) {
        for (int l = 0; l < levels; ++l)
            violations[static_cast<std::size_t>(l)] =
                run_level(config, options, l, dir, logs[static_cast<std::size_t>(l)]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int l = next.fetch_add(1);
                    if (l >= levels) return;
                    violations[static_cast<std::size_t>(l)] =
                        run_level(config, options, l, dir, logs[static_cast<std::size_t>(l)]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    int status = 0;
    for (int l = 0; l < levels; ++l) {
        log << logs[static_cast<std::size_t>(l)].str();
        const std::string& v = violations[static_cast<std::size_t>(l)];
        if (!v.empty()) {
            log << "level " << l << " violated contract: " << v << "\n";
            status = 1;
        }
    }
    return status;
}

CompareReport compare_manifests(const std::string& manifest_a, const std::string& manifest_b) {
    auto read = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) fail("incomparable", "cannot open manifest '" + path + "'");
        std::map<std::string, std::string> kv;
        std::vector<std::string> order;
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            kv[key] = line.substr(eq + 3);
            order.push_back(key);
        }
        return std::make_pair(kv, order);
    };
    auto [a, order_a] = read(manifest_a);
    auto [b, order_b] = read(manifest_b);

    if (!a.count("config_hash") || !b.count("config_hash") ||
        a["config_hash"] != b["config_hash"])
        fail("incomparable", "manifests come from different configs");

    static const char* skip[] = {"config", "config_hash", "version", "level",
                                 "target_h", "seed", "p"};
    CompareReport rep;
    for (const std::string& key : order_a) {
        bool skipped = false;
        for (const char* s : skip)
            if (key == s) skipped = true;
        if (skipped || !b.count(key)) continue;
        CompareRow row;
        row.key = key;
        try {
            row.a = std::stod(a[key]);
            row.b = std::stod(b[key]);
        } catch (...) {
            continue;
        }
        row.ratio = row.b != 0 ? row.a / row.b : (row.a == 0 ? 1 : kInfinity);
        row.flagged = !(row.ratio >= 0.5 && row.ratio <= 2.0);
        if (row.flagged) ++rep.flagged;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace pplab

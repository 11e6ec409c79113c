/*
 * cube - trivariate B-spline feature volumes for 3D surface representation.
 *
 * Copyright 2026 The cube authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cube/cli.hpp"

#include "cube/editing.hpp"
#include "cube/error.hpp"
#include "cube/fitting.hpp"
#include "cube/mesh_io.hpp"
#include "cube/metrics.hpp"
#include "cube/model_io.hpp"
#include "cube/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cube::cli {

namespace {

struct FitFlags
{
    std::string config_path;
    std::optional<int> steps;
    std::optional<double> lr;
    std::optional<std::string> loss;
    std::optional<std::string> optimizer;
    bool no_mlp = false;
    bool optimize_weights = false;
    std::optional<double> base_weight;
    std::optional<double> out_weight;
    std::uint64_t seed = 0;
    std::string report_path;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f)
{
    cmd->add_option("--config", f.config_path, "JSON fit config (keys match FitConfig fields)")->check(CLI::ExistingFile);
    cmd->add_option("--steps", f.steps, "optimizer steps");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--loss", f.loss, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
    cmd->add_option("--optimizer", f.optimizer, "adam or gd")->check(CLI::IsMember({"adam", "gd"}));
    cmd->add_flag("--no-mlp", f.no_mlp, "freeze the residual MLP");
    cmd->add_flag("--optimize-weights", f.optimize_weights, "also optimize rational weights");
    cmd->add_option("--base-weight", f.base_weight, "weight of the base-shape loss");
    cmd->add_option("--out-weight", f.out_weight, "weight of the final-shape loss");
    cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
    cmd->add_option("--report", f.report_path, "write the loss trace here");
}

FitConfig resolve_config(const FitFlags& f, FitConfig base, int threads)
{
    FitConfig c = f.config_path.empty() ? base : load_fit_config(f.config_path, base);
    if (f.steps)
        c.steps = *f.steps;
    if (f.lr)
        c.learning_rate = *f.lr;
    if (f.loss)
        c.loss = *f.loss == "l1" ? LossKind::l1 : LossKind::l2;
    if (f.optimizer)
        c.optimizer = *f.optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::gradient_descent;
    if (f.no_mlp)
        c.optimize_mlp = false;
    if (f.optimize_weights)
        c.optimize_weights = true;
    if (f.base_weight)
        c.base_loss_weight = *f.base_weight;
    if (f.out_weight)
        c.out_loss_weight = *f.out_weight;
    c.seed = f.seed;
    c.threads = threads;
    c.validate();
    return c;
}

void print_fit_summary(std::ostream& out, const FitReport& r)
{
    const auto smooth = smoothed_trace(r.losses);
    out << "metric=" << r.metric_name << '\n'
        << "initial_mean=" << r.initial_metric.mean << '\n'
        << "final_mean=" << r.final_metric.mean << '\n';
    if (r.metric_name == "reprojection")
        out << "initial_rms=" << r.initial_rms << '\n' << "final_rms=" << r.final_rms << '\n';
    out << "first_loss=" << r.losses.front() << '\n'
        << "final_loss=" << r.final_loss << '\n'
        << "smoothed_first=" << smooth.front() << '\n'
        << "smoothed_last=" << smooth.back() << '\n'
        << "seconds=" << r.seconds << '\n';
    for (const auto& w : r.warnings)
        out << "warning: " << w << '\n';
}

/// `s face b0 b1 b2` sample lines and `f a b c` face lines (0-based sample indices).
void read_sample_file(const std::string& path, std::vector<FacePoint>& samples, std::vector<Face>& faces)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        if (tag == "s") {
            long long face = -1;
            FacePoint fp;
            if (!(ls >> face >> fp.bary[0] >> fp.bary[1] >> fp.bary[2]) || face < 0)
                throw ParseError("sample line needs: s face_index b0 b1 b2", line_no);
            fp.face = static_cast<std::uint32_t>(face);
            samples.push_back(fp);
        } else if (tag == "f") {
            long long a = -1, b = -1, c = -1;
            if (!(ls >> a >> b >> c) || a < 0 || b < 0 || c < 0)
                throw ParseError("face line needs three sample indices", line_no);
            faces.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)});
        } else {
            throw ParseError("unknown record '" + tag + "'", line_no);
        }
    }
}

EditorService* active_service = nullptr;

void handle_signal(int)
{
    if (active_service)
        active_service->stop();
}

} // namespace

int run(int argc, const char* const* argv)
{
    return run(argc, argv, std::cout, std::cerr);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"cube: trivariate B-spline feature volumes for 3D surfaces"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads for fitting")->check(CLI::PositiveNumber)->capture_default_str();

    // init
    auto* init = app.add_subcommand("init", "create an identity model over a template mesh");
    std::string init_template, init_out;
    ModelOptions init_opts;
    init->add_option("template", init_template, "template mesh (.obj/.ply)")->required()->check(CLI::ExistingFile);
    init->add_option("-o,--output", init_out, "output .cube")->required();
    init->add_option("--controls", init_opts.controls, "controls per axis M")->capture_default_str();
    init->add_option("--dim", init_opts.dim, "feature dimension d")->capture_default_str();
    init->add_option("--degree", init_opts.degree, "B-spline degree r")->capture_default_str();
    init->add_option("--margin", init_opts.margin, "unit-cube margin")->capture_default_str();
    init->add_option("--seed", init_opts.seed, "MLP initialization seed")->capture_default_str();
    init->add_flag("--scene-space", init_opts.scene_space, "identity lattice in template coordinates");

    // fit-mesh
    auto* fit_mesh = app.add_subcommand("fit-mesh", "fit a model to a target mesh in vertex correspondence");
    std::string fm_model, fm_target, fm_out;
    FitFlags fm_flags;
    fit_mesh->add_option("model", fm_model, "input .cube")->required()->check(CLI::ExistingFile);
    fit_mesh->add_option("target", fm_target, "target mesh")->required()->check(CLI::ExistingFile);
    fit_mesh->add_option("-o,--output", fm_out, "fitted .cube")->required();
    add_fit_flags(fit_mesh, fm_flags);

    // fit-landmarks
    auto* fit_lm = app.add_subcommand("fit-landmarks", "fit a model to 2D landmarks under a fixed camera");
    std::string fl_model, fl_landmarks, fl_camera, fl_out;
    FitFlags fl_flags;
    fit_lm->add_option("model", fl_model, "input .cube")->required()->check(CLI::ExistingFile);
    fit_lm->add_option("landmarks", fl_landmarks, "landmark file")->required()->check(CLI::ExistingFile);
    fit_lm->add_option("camera", fl_camera, "camera file")->required()->check(CLI::ExistingFile);
    fit_lm->add_option("-o,--output", fl_out, "fitted .cube")->required();
    add_fit_flags(fit_lm, fl_flags);

    // decode
    auto* decode = app.add_subcommand("decode", "decode a model to a mesh");
    std::string dec_model, dec_out, dec_samples;
    bool dec_base = false;
    decode->add_option("model", dec_model, "input .cube")->required()->check(CLI::ExistingFile);
    decode->add_option("-o,--output", dec_out, "output mesh (.obj/.ply)")->required();
    decode->add_option("--samples", dec_samples, "resample at template surface points")->check(CLI::ExistingFile);
    decode->add_flag("--base", dec_base, "write the base shape instead of the final shape");

    // edit
    auto* edit = app.add_subcommand("edit", "edit control features");
    edit->require_subcommand(1);
    auto* displace = edit->add_subcommand("displace", "move one control (1-based indices)");
    std::string ed_model, ed_out;
    std::vector<int> ed_control;
    std::vector<double> ed_delta;
    displace->add_option("model", ed_model, "input .cube")->required()->check(CLI::ExistingFile);
    displace->add_option("--control", ed_control, "i,j,k")->required()->delimiter(',')->expected(3);
    displace->add_option("--delta", ed_delta, "dx,dy,dz")->required()->delimiter(',')->expected(3);
    displace->add_option("-o,--output", ed_out, "output .cube")->required();

    auto* swap = edit->add_subcommand("swap", "take a region of controls from a second model");
    std::string sw_a, sw_b, sw_region, sw_out;
    swap->add_option("a", sw_a, "base model")->required()->check(CLI::ExistingFile);
    swap->add_option("b", sw_b, "donor model")->required()->check(CLI::ExistingFile);
    swap->add_option("--region", sw_region, "'box i0:i1,j0:j1,k0:k1' or 'set (i,j,k);...'")->required();
    swap->add_option("-o,--output", sw_out, "output .cube")->required();

    auto* interp = edit->add_subcommand("interp", "linear interpolation of control features");
    std::string ip_a, ip_b, ip_out;
    double ip_alpha = 0.5;
    interp->add_option("a", ip_a, "model at alpha = 0")->required()->check(CLI::ExistingFile);
    interp->add_option("b", ip_b, "model at alpha = 1")->required()->check(CLI::ExistingFile);
    interp->add_option("--alpha", ip_alpha, "blend factor in [0, 1]")->capture_default_str();
    interp->add_option("-o,--output", ip_out, "output .cube")->required();

    auto* transfer = edit->add_subcommand("transfer", "apply a source expression offset to a target");
    std::string tr_sn, tr_se, tr_tn, tr_out;
    transfer->add_option("source_neutral", tr_sn)->required()->check(CLI::ExistingFile);
    transfer->add_option("source_expr", tr_se)->required()->check(CLI::ExistingFile);
    transfer->add_option("target_neutral", tr_tn)->required()->check(CLI::ExistingFile);
    transfer->add_option("-o,--output", tr_out, "output .cube")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "registration error metrics");
    metrics->require_subcommand(1);
    std::string mt_pred, mt_ref;
    bool mt_table = false;
    auto* pts = metrics->add_subcommand("pts", "point-to-scan surface distance");
    pts->add_option("pred", mt_pred)->required()->check(CLI::ExistingFile);
    pts->add_option("scan", mt_ref)->required()->check(CLI::ExistingFile);
    pts->add_flag("--table", mt_table, "aligned table instead of key=value lines");
    auto* v2v = metrics->add_subcommand("v2v", "vertex-to-vertex distance");
    v2v->add_option("pred", mt_pred)->required()->check(CLI::ExistingFile);
    v2v->add_option("gt", mt_ref)->required()->check(CLI::ExistingFile);
    v2v->add_flag("--table", mt_table, "aligned table instead of key=value lines");

    // serve
    auto* serve = app.add_subcommand("serve", "interactive editing service over HTTP");
    std::string sv_model, sv_host = "127.0.0.1";
    int sv_port = 8080;
    serve->add_option("model", sv_model, "input .cube")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", sv_port, "TCP port")->capture_default_str();
    serve->add_option("--host", sv_host, "bind address")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*init) {
            const CubeModel model = create_model(load_mesh(init_template), init_opts);
            save_model(model, init_out);
            out << "wrote " << init_out << " (m=" << model.lattice.m() << ", d=" << model.lattice.dim()
                << ", samples=" << model.tmpl.samples.size() << ")\n";
        } else if (*fit_mesh) {
            const FitConfig cfg = resolve_config(fm_flags, FitConfig::mesh_defaults(), threads);
            auto [model, report] = fit_to_mesh(load_model(fm_model), load_mesh(fm_target), cfg);
            save_model(model, fm_out);
            if (!fm_flags.report_path.empty())
                save_report(report, fm_flags.report_path);
            print_fit_summary(out, report);
        } else if (*fit_lm) {
            const FitConfig cfg = resolve_config(fl_flags, FitConfig::landmark_defaults(), threads);
            auto [model, report] =
                fit_to_landmarks(load_model(fl_model), load_landmarks(fl_landmarks), load_camera(fl_camera), cfg);
            save_model(model, fl_out);
            if (!fl_flags.report_path.empty())
                save_report(report, fl_flags.report_path);
            print_fit_summary(out, report);
        } else if (*decode) {
            const CubeModel model = load_model(dec_model);
            TriMesh mesh;
            if (!dec_samples.empty()) {
                std::vector<FacePoint> samples;
                std::vector<Face> faces;
                read_sample_file(dec_samples, samples, faces);
                mesh = resample_topology(model, samples, faces);
            } else {
                mesh = dec_base ? decode_base_mesh(model) : decode_mesh(model);
            }
            save_mesh(mesh, dec_out);
            out << "wrote " << dec_out << " (" << mesh.vertices.size() << " vertices)\n";
        } else if (*edit) {
            CubeModel result = [&] {
                if (*displace) {
                    const Index3 c{ed_control[0] - 1, ed_control[1] - 1, ed_control[2] - 1};
                    return displace_control(load_model(ed_model), c, Eigen::Vector3d(ed_delta[0], ed_delta[1], ed_delta[2]));
                }
                if (*swap)
                    return swap_region(load_model(sw_a), load_model(sw_b), LatticeRegion::parse(sw_region));
                if (*interp)
                    return interpolate(load_model(ip_a), load_model(ip_b), ip_alpha);
                return transfer_expression(load_model(tr_sn), load_model(tr_se), load_model(tr_tn));
            }();
            const std::string& path = *displace ? ed_out : *swap ? sw_out : *interp ? ip_out : tr_out;
            save_model(result, path);
            out << "wrote " << path << '\n';
        } else if (*metrics) {
            const TriMesh pred = load_mesh(mt_pred);
            const TriMesh ref = load_mesh(mt_ref);
            const bool is_pts = static_cast<bool>(*pts);
            const MetricSummary s = is_pts ? pts_metric(pred, ref) : v2v_metric(pred, ref);
            out << (mt_table ? format_table(is_pts ? "pts" : "v2v", s) : format_key_value(s));
        } else if (*serve) {
            EditorService service(load_model(sv_model));
            const int port = service.bind(sv_host, sv_port);
            if (port < 0) {
                err << "error: cannot bind " << sv_host << ":" << sv_port << '\n';
                return 2;
            }
            out << "serving on http://" << sv_host << ":" << port << '\n' << std::flush;
            active_service = &service;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            service.listen();
            active_service = nullptr;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace cube::cli

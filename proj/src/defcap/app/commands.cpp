/*
 Copyright 2026 The defcap Authors.

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "defcap/app/commands.hpp"

#include "defcap/app/dataset.hpp"
#include "defcap/fit/optimizer.hpp"
#include "defcap/geom/obj_io.hpp"
#include "defcap/metrics/metrics.hpp"
#include "defcap/model/model_io.hpp"
#include "defcap/pbd/solver.hpp"
#include "defcap/scenario/scenario.hpp"
#include "defcap/stiffness/stiffness.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>

namespace defcap::app {

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"gen-data", "fit", "eval", "stiffness", "simulate", "inspect"};
    return names;
}

namespace {

using geom::format_double;

struct Context {
    fs::path base;
    fs::path out;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::ostringstream summary;

    fs::path in(const std::string& p) const {
        const fs::path x(p);
        return (x.is_absolute() ? x : base / x).lexically_normal();
    }

    void input(const fs::path& p) {
        const std::string s = fs::absolute(p).lexically_normal().string();
        if (std::find(inputs.begin(), inputs.end(), s) == inputs.end()) inputs.push_back(s);
    }

    fs::path output(const std::string& rel) {
        if (std::find(outputs.begin(), outputs.end(), rel) == outputs.end()) outputs.push_back(rel);
        const fs::path p = out / rel;
        fs::create_directories(p.parent_path());
        return p;
    }
};

void write_obj_atomic(const fs::path& path, std::span<const Vec3> vertices, std::span<const geom::Triangle> triangles,
                      std::span<const Vec3> colors = {}) {
    std::ostringstream s;
    geom::write_obj(s, vertices, triangles, colors);
    write_file_atomic(path, s.str());
}

void save_model_outputs(Context& ctx, const model::DeformableModel& m, const std::string& stem) {
    model::save_model(m, ctx.output(stem + ".json"));
    ctx.output(stem + ".obj");
    ctx.output(stem + ".bin");
}

std::pair<std::size_t, std::size_t> frame_range(const json& j, std::size_t count, const std::string& what) {
    if (j.is_null()) return {0, count};
    require(j.is_array() && j.size() == 2 && j[0].is_number_unsigned() && j[1].is_number_unsigned(),
            ErrorCode::validation, what + " must be [begin, end) with non-negative integers");
    const auto b = j[0].get<std::size_t>();
    const auto e = j[1].get<std::size_t>();
    require(b < e && e <= count, ErrorCode::validation,
            what + " [" + std::to_string(b) + ", " + std::to_string(e) + ") is outside 0.." + std::to_string(count));
    return {b, e};
}

// ---- config parsing -------------------------------------------------------

void parse_camera(ConfigReader r, model::Camera& c) {
    c.fx = r.number("fx", c.fx);
    c.fy = r.number("fy", c.fy);
    c.cx = r.number("cx", c.cx);
    c.cy = r.number("cy", c.cy);
    r.finish();
    c.validate();
}

void parse_solver(ConfigReader r, pbd::SolverConfig& s) {
    s.dt = r.number("dt", s.dt);
    s.iterations = r.integer("iterations", s.iterations);
    s.substeps = r.integer("substeps", s.substeps);
    s.friction_static = r.number("friction_static", s.friction_static);
    s.friction_kinetic = r.number("friction_kinetic", s.friction_kinetic);
    s.gravity = r.vec3("gravity", s.gravity);
    s.skin_offset = r.number("skin_offset", s.skin_offset);
    s.damping = r.number("damping", s.damping);
    ConfigReader c = r.object("coupling");
    auto& k = s.coupling;
    k.stretch_lo = c.number("stretch_lo", k.stretch_lo);
    k.stretch_hi = c.number("stretch_hi", k.stretch_hi);
    k.bend_lo = c.number("bend_lo", k.bend_lo);
    k.bend_hi = c.number("bend_hi", k.bend_hi);
    k.track_lo = c.number("track_lo", k.track_lo);
    k.track_hi = c.number("track_hi", k.track_hi);
    c.finish();
    r.finish();
    s.validate();
}

void parse_proxies(ConfigReader r, scenario::ProxyConfig& p) {
    p.head_levels = r.integer("head_levels", p.head_levels);
    p.head_radii = r.vec3("head_radii", p.head_radii);
    p.skull_levels = r.integer("skull_levels", p.skull_levels);
    p.hand_target_vertices = r.integer("hand_target_vertices", p.hand_target_vertices);
    p.ring_segments = r.integer("ring_segments", p.ring_segments);
    p.shape_count = r.integer("shape_count", p.shape_count);
    p.expression_count = r.integer("expression_count", p.expression_count);
    r.finish();
    p.validate();
}

void parse_scenario(ConfigReader r, scenario::Scenario& s) {
    s.action = scenario::parse_action(r.string("action", scenario::to_string(s.action)));
    s.expression = scenario::parse_expression(r.string("expression", scenario::to_string(s.expression)));
    s.frame_count = r.integer("frame_count", s.frame_count);
    s.frame_dt = r.number("frame_dt", s.frame_dt);
    s.approach_depth = r.number("approach_depth", s.approach_depth);
    s.standoff = r.number("standoff", s.standoff);
    s.min_gap = r.number("min_gap", s.min_gap);
    s.tangential_speed = r.number("tangential_speed", s.tangential_speed);
    r.finish();
    s.validate();
}

void parse_optimizer(ConfigReader r, fit::OptimizerConfig& o) {
    o.steps = r.integer("steps", o.steps);
    o.lr_translation = r.number("lr_translation", o.lr_translation);
    o.lr_rotation = r.number("lr_rotation", o.lr_rotation);
    o.lr_shape = r.number("lr_shape", o.lr_shape);
    o.lr_expression = r.number("lr_expression", o.lr_expression);
    o.lr_deformation = r.number("lr_deformation", o.lr_deformation);
    o.warmup_steps = r.integer("warmup_steps", o.warmup_steps);
    o.final_lr_fraction = r.number("final_lr_fraction", o.final_lr_fraction);
    o.beta1 = r.number("beta1", o.beta1);
    o.beta2 = r.number("beta2", o.beta2);
    o.epsilon = r.number("epsilon", o.epsilon);
    o.epsilon_deformation = r.number("epsilon_deformation", o.epsilon_deformation);
    o.tolerance = r.number("tolerance", o.tolerance);
    r.finish();
}

void parse_fit(ConfigReader r, fit::FitConfig& f) {
    f.lambda_touch = r.number("lambda_touch", f.lambda_touch);
    f.lambda_col = r.number("lambda_col", f.lambda_col);
    f.lambda_depth = r.number("lambda_depth", f.lambda_depth);
    f.lambda_beta = r.number("lambda_beta", f.lambda_beta);
    f.lambda_psi = r.number("lambda_psi", f.lambda_psi);
    f.lambda_vel = r.number("lambda_vel", f.lambda_vel);
    f.lambda_acc = r.number("lambda_acc", f.lambda_acc);
    f.frame_dt = r.number("frame_dt", f.frame_dt);
    f.keypoint_scale = r.number("keypoint_scale", f.keypoint_scale);
    f.window = r.integer("window", f.window);
    f.optimize_face = r.boolean("optimize_face", f.optimize_face);
    f.optimize_hand = r.boolean("optimize_hand", f.optimize_hand);
    f.optimize_deformation = r.boolean("optimize_deformation", f.optimize_deformation);
    parse_optimizer(r.object("optimizer"), f.optimizer);
    r.finish();
    f.validate();
}

std::string fixed(double v, int digits = 2) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string mm(double metres) { return fixed(metres * metrics::kMillimetres); }

double max_norm(std::span<const Vec3> v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, x.norm());
    return m;
}

// ---- gen-data -------------------------------------------------------------

void run_gen_data(Context& ctx, ConfigReader& root) {
    scenario::GenerateConfig gc;
    gc.seed = root.unsigned64("seed", gc.seed);
    scenario::Scenario sc;
    parse_scenario(root.object("scenario"), sc);
    {
        ConfigReader g = root.object("generation");
        gc.head_rotation = g.vec3("head_rotation", gc.head_rotation);
        gc.head_translation = g.vec3("head_translation", gc.head_translation);
        gc.subject_shape_sigma = g.number("subject_shape_sigma", gc.subject_shape_sigma);
        gc.keypoint_noise_px = g.number("keypoint_noise_px", gc.keypoint_noise_px);
        gc.dropout = g.number("dropout", gc.dropout);
        gc.prior_samples = g.integer("prior_samples", gc.prior_samples);
        gc.prior_sigma = g.number("prior_sigma", gc.prior_sigma);
        gc.contact_distance = g.number("contact_distance", gc.contact_distance);
        gc.tracking.steps_per_frame = g.integer("steps_per_frame", gc.tracking.steps_per_frame);
        parse_solver(g.object("solver"), gc.tracking.solver);
        g.finish();
    }
    parse_camera(root.object("camera"), gc.camera);
    parse_proxies(root.object("proxies"), gc.proxies);
    ConfigReader st = root.object("stiffness");
    const double exponent = st.number("exponent", stiffness::kDefaultExponent);
    st.finish();
    root.finish();
    gc.validate();

    const auto px = scenario::build_proxies(gc.seed, gc.proxies);
    const auto& face_mesh = *px.face->mesh;
    const auto map = stiffness::ssd_stiffness(face_mesh, *px.skull, face_mesh, exponent);
    const auto seq = scenario::generate(sc, px, map, gc);
    const std::size_t n = seq.frame_count();

    save_model_outputs(ctx, *px.face, "models/face");
    save_model_outputs(ctx, *px.hand, "models/hand");
    write_obj_atomic(ctx.output("models/skull.obj"), px.skull->vertices(), px.skull->triangles());
    model::save_camera(seq.camera, ctx.output("camera.json"));
    write_json_atomic(ctx.output("stiffness.json"), stiffness_to_json(map));

    SequenceIndex index;
    index.face_topology = "models/face.obj";
    index.contacts = "contacts.json";
    const auto& hand_tris = px.hand->mesh->triangles();
    for (std::size_t t = 0; t < n; ++t) {
        const std::string stem = "frames/" + frame_stem(t);
        SequenceFrame f{stem + "_reference.obj", stem + "_deformed.obj", stem + "_hand.obj", stem + "_displacement.json"};
        write_obj_atomic(ctx.output(f.reference), seq.trajectory.reference[t], face_mesh.triangles());
        write_obj_atomic(ctx.output(f.deformed), seq.deformed[t], face_mesh.triangles());
        write_obj_atomic(ctx.output(f.hand), seq.trajectory.hand[t], hand_tris);
        write_displacement(ctx.output(f.displacement), seq.displacements[t]);
        index.frames.push_back(std::move(f));
    }

    std::vector<fit::FrameObservation> obs(n);
    std::vector<FrameContacts> contacts(n);
    for (std::size_t t = 0; t < n; ++t) {
        obs[t].face_keypoints = seq.face_keypoints[t];
        obs[t].face_confidence = seq.face_confidence[t];
        obs[t].hand_keypoints = seq.hand_keypoints[t];
        obs[t].hand_confidence = seq.hand_confidence[t];
        contacts[t].contact = seq.contact_frames[t] != 0;
        contacts[t].face_probs.assign(seq.face_contacts[t].begin(), seq.face_contacts[t].end());
        contacts[t].hand_probs.assign(seq.hand_contacts[t].begin(), seq.hand_contacts[t].end());
    }
    write_json_atomic(ctx.output("observations.json"), observations_to_json(obs));
    write_json_atomic(ctx.output("contacts.json"), contacts_to_json(contacts));
    write_json_atomic(ctx.output("priors.json"), priors_to_json(seq.priors));
    write_json_atomic(ctx.output("ground_truth.json"),
                      params_sequence_to_json(seq.trajectory.face_params, seq.trajectory.hand_params));
    write_sequence_index(ctx.out, index);
    ctx.output("sequence.json");

    double max_disp = 0.0;
    for (const auto& d : seq.displacements) max_disp = std::max(max_disp, max_norm(d));
    const auto contact_frames = std::count(seq.contact_frames.begin(), seq.contact_frames.end(), std::uint8_t{1});
    ctx.summary << "gen-data: " << scenario::to_string(sc.action) << ", " << n << " frames, " << contact_frames
                << " contact frames, max displacement " << mm(max_disp) << " mm\n";
}

// ---- fit ------------------------------------------------------------------

void run_fit(Context& ctx, ConfigReader& root) {
    root.unsigned64("seed", 0);
    const std::string dataset = root.string("dataset", "");
    auto locate = [&](const std::string& key, const std::string& rel) -> fs::path {
        const std::string s = root.string(key, "");
        if (!s.empty()) return ctx.in(s);
        require(!dataset.empty(), ErrorCode::validation, "config." + key + " is required without config.dataset");
        return ctx.in(dataset) / rel;
    };
    const fs::path face_path = locate("face_model", "models/face.json");
    const fs::path hand_path = locate("hand_model", "models/hand.json");
    const fs::path camera_path = locate("camera", "camera.json");
    const fs::path stiffness_path = locate("stiffness", "stiffness.json");
    const fs::path obs_path = locate("observations", "observations.json");
    const fs::path contacts_path = locate("contacts", "contacts.json");
    const bool use_priors = root.string("priors", "") != "none";
    const fs::path priors_path = use_priors ? locate("priors", "priors.json") : fs::path();
    const fs::path init_path = locate("init", "ground_truth.json");
    const bool zero_p0 = root.string("deformation0", "") == "zeros";
    const fs::path p0_dir = zero_p0 ? fs::path() : locate("deformation0", "");
    const json frames_json = root.raw("frames");
    ConfigReader off = root.object("init_offset");
    const Vec3 face_offset = off.vec3("face", Vec3::Zero());
    const Vec3 hand_offset = off.vec3("hand", Vec3::Zero());
    off.finish();
    fit::FitConfig fc;
    parse_fit(root.object("fit"), fc);
    root.finish();

    fit::FitProblem problem;
    problem.face_model = std::make_shared<const model::DeformableModel>(model::load_model(face_path));
    problem.hand_model = std::make_shared<const model::DeformableModel>(model::load_model(hand_path));
    problem.camera = model::load_camera(camera_path);
    problem.face_stiffness = stiffness_from_json(read_json_file(stiffness_path), stiffness_path.string());
    observations_from_json(read_json_file(obs_path), problem.frames);
    const std::size_t n = problem.frames.size();
    const auto contacts = contacts_from_json(read_json_file(contacts_path));
    require(contacts.size() == n, ErrorCode::validation, contacts_path.string() + ": frame count differs from observations");
    for (std::size_t t = 0; t < n; ++t) {
        problem.frames[t].contacts.face_probs = contacts[t].face_probs;
        problem.frames[t].contacts.hand_probs = contacts[t].hand_probs;
    }
    if (use_priors) {
        const auto priors = priors_from_json(read_json_file(priors_path));
        require(priors.size() == n, ErrorCode::validation, priors_path.string() + ": frame count differs from observations");
        for (std::size_t t = 0; t < n; ++t) problem.frames[t].priors = priors[t];
        ctx.input(priors_path);
    }
    params_sequence_from_json(read_json_file(init_path), *problem.face_model, *problem.hand_model, problem.face_init,
                              problem.hand_init);
    require(problem.face_init.size() == n, ErrorCode::validation, init_path.string() + ": frame count differs from observations");
    for (auto& p : problem.face_init) p.translation += face_offset;
    for (auto& p : problem.hand_init) p.translation += hand_offset;
    if (!zero_p0) {
        const auto p0 = load_sequence(p0_dir, FaceVariant::deformed);
        require(p0.displacement.size() == n, ErrorCode::validation, p0_dir.string() + ": frame count differs from observations");
        for (std::size_t t = 0; t < n; ++t) problem.frames[t].deformation0 = p0.displacement[t];
        for (const auto& f : p0.files) ctx.input(f);
    }
    for (const auto& p : {face_path, hand_path, camera_path, stiffness_path, obs_path, contacts_path, init_path}) {
        ctx.input(p);
    }

    const auto [b, e] = frame_range(frames_json, n, "config.frames");
    problem = problem.slice(b, e);
    const auto result = fit::optimize(problem, fc);
    const std::size_t m = problem.frames.size();

    const auto& face_model = *problem.face_model;
    const auto& hand_model = *problem.hand_model;
    SequenceIndex index;
    index.face_topology = "face_topology.obj";
    index.contacts = "contacts.json";
    write_obj_atomic(ctx.output(index.face_topology), face_model.mesh->vertices(), face_model.mesh->triangles());
    std::vector<FrameContacts> clip(contacts.begin() + static_cast<std::ptrdiff_t>(b),
                                    contacts.begin() + static_cast<std::ptrdiff_t>(e));
    write_json_atomic(ctx.output("contacts.json"), contacts_to_json(clip));
    for (std::size_t t = 0; t < m; ++t) {
        const std::string stem = "frames/" + frame_stem(t);
        SequenceFrame f{stem + "_reference.obj", stem + "_deformed.obj", stem + "_hand.obj", stem + "_displacement.json"};
        const Points face = model::evaluate(face_model, result.state.face[t]);
        write_obj_atomic(ctx.output(f.reference), face, face_model.mesh->triangles());
        write_obj_atomic(ctx.output(f.deformed), model::compose_deformed(face, result.state.deformation[t]),
                         face_model.mesh->triangles());
        write_obj_atomic(ctx.output(f.hand), model::evaluate(hand_model, result.state.hand[t]),
                         hand_model.mesh->triangles());
        write_displacement(ctx.output(f.displacement), result.state.deformation[t]);
        index.frames.push_back(std::move(f));
    }
    write_sequence_index(ctx.out, index);
    ctx.output("sequence.json");
    write_json_atomic(ctx.output("params.json"), params_sequence_to_json(result.state.face, result.state.hand));

    std::ostringstream csv;
    csv << "window,first_frame,step,total,face_2d,hand_2d,face_reg,hand_reg,touch,penetration,regdef_edge,"
           "regdef_bend,regdef_anchor,depth,penetrating\n";
    for (const auto& row : result.trace) {
        const auto& x = row.terms;
        csv << row.window << ',' << row.first_frame << ',' << row.step;
        for (double v : {x.total, x.face_2d, x.hand_2d, x.face_reg, x.hand_reg, x.touch, x.penetration, x.regdef_edge,
                         x.regdef_bend, x.regdef_anchor, x.depth}) {
            csv << ',' << format_double(v);
        }
        csv << ',' << x.penetrating << '\n';
    }
    write_file_atomic(ctx.output("trace.csv"), csv.str());

    json windows = json::array();
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const bool first = i == 0 || result.trace[i - 1].window != result.trace[i].window;
        const bool last = i + 1 == result.trace.size() || result.trace[i + 1].window != result.trace[i].window;
        if (first) windows.push_back({{"first_frame", result.trace[i].first_frame}, {"initial", result.trace[i].terms.total}});
        if (last) {
            windows.back()["final"] = result.trace[i].terms.total;
            windows.back()["steps"] = result.trace[i].step + 1;
        }
    }
    write_json_atomic(ctx.output("fit_summary.json"), {{"status", fit::to_string(result.status)},
                                                        {"message", result.message},
                                                        {"frames", {b, e}},
                                                        {"windows", windows}});
    ctx.summary << "fit: frames [" << b << ", " << e << "), " << windows.size() << " window(s), status "
                << fit::to_string(result.status) << "\n";
}

// ---- eval -----------------------------------------------------------------

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <class T>
std::vector<T> clip(const std::vector<T>& v, std::pair<std::size_t, std::size_t> r) {
    return {v.begin() + static_cast<std::ptrdiff_t>(r.first), v.begin() + static_cast<std::ptrdiff_t>(r.second)};
}

void run_eval(Context& ctx, ConfigReader& root) {
    root.unsigned64("seed", 0);
    const std::string pred_dir = root.string("prediction", "");
    const std::string gt_dir = root.string("ground_truth", "");
    require(!pred_dir.empty() && !gt_dir.empty(), ErrorCode::validation,
            "config.prediction and config.ground_truth are required");
    const auto pred_variant = parse_face_variant(root.string("prediction_face", "deformed"));
    const auto gt_variant = parse_face_variant(root.string("ground_truth_face", "deformed"));
    const std::string contacts_path = root.string("contacts", "");
    const json pred_frames = root.raw("prediction_frames");
    const json gt_frames = root.raw("ground_truth_frames");
    root.finish();

    const auto pred = load_sequence(ctx.in(pred_dir), pred_variant);
    const auto gt = load_sequence(ctx.in(gt_dir), gt_variant);
    for (const auto& f : pred.files) ctx.input(f);
    for (const auto& f : gt.files) ctx.input(f);
    std::vector<FrameContacts> contacts = gt.contacts;
    if (!contacts_path.empty()) {
        contacts = contacts_from_json(read_json_file(ctx.in(contacts_path)));
        require(contacts.size() == gt.face.size(), ErrorCode::validation,
                contacts_path + ": frame count differs from the ground truth");
        ctx.input(ctx.in(contacts_path));
    }
    const auto pr = frame_range(pred_frames, pred.face.size(), "config.prediction_frames");
    const auto gr = frame_range(gt_frames, gt.face.size(), "config.ground_truth_frames");
    require(pr.second - pr.first == gr.second - gr.first, ErrorCode::validation,
            "prediction and ground truth cover different frame counts");
    require(pred.face_mesh.vertex_count() == gt.face_mesh.vertex_count(), ErrorCode::validation,
            "prediction and ground truth face vertex counts differ");

    std::vector<metrics::SceneFrame> p, g;
    for (std::size_t t = pr.first; t < pr.second; ++t) p.push_back({pred.face[t], pred.hand[t]});
    for (std::size_t t = gr.first; t < gr.second; ++t) g.push_back({gt.face[t], gt.hand[t]});
    std::vector<bool> gt_contact(g.size(), false);
    if (!contacts.empty()) {
        for (std::size_t t = 0; t < g.size(); ++t) gt_contact[t] = contacts[gr.first + t].contact;
    }
    const auto ev = metrics::evaluate_all(p, g, gt.face_mesh, clip(pred.displacement, pr), clip(gt.displacement, gr),
                                          gt_contact);
    const auto& r = ev.report;
    json report = {
        {"conventions",
         {{"units", "mm; non_col, touchness and f_score in percent"},
          {"pve_centered", "each sequence translated per frame by its own face centroid, applied to face and hand"},
          {"defe_plus", "ground-truth displacement norm above 5 mm"},
          {"col_dist", "sum of hand penetration depths / (hand vertex count x frame count)"},
          {"touchness", "contact frames whose minimum hand-to-face signed distance is below 5 mm"},
          {"f_score", "harmonic mean of non_col and touchness"}}},
        {"frame_count", g.size()},
        {"metrics",
         {{"pve", r.pve},
          {"pve_centered", r.pve_centered},
          {"defe", optional_json(r.defe)},
          {"defe_plus", optional_json(r.defe_plus)},
          {"col_dist", r.col_dist},
          {"non_col", r.non_col},
          {"touchness", optional_json(r.touchness)},
          {"f_score", optional_json(r.f_score)}}},
        {"sign_unreliable", r.sign_unreliable}};
    write_json_atomic(ctx.output("report.json"), report);

    std::ostringstream csv;
    csv << "frame,pve,pve_centered,defe,col_depth_sum,penetrating,min_distance,touching,gt_contact\n";
    for (const auto& f : ev.frames) {
        csv << f.frame << ',' << format_double(f.pve) << ',' << format_double(f.pve_centered) << ','
            << optional_csv(f.defe) << ',' << format_double(f.col_depth_sum) << ',' << f.penetrating << ','
            << format_double(f.min_distance) << ',' << int(f.touching) << ',' << int(f.gt_contact) << '\n';
    }
    write_file_atomic(ctx.output("frames.csv"), csv.str());

    auto show = [](const std::optional<double>& v) { return v ? fixed(*v, 3) : std::string("n/a"); };
    ctx.summary << "eval: " << g.size() << " frames, pve " << fixed(r.pve, 3) << " mm, defe " << show(r.defe)
                << " mm, +defe " << show(r.defe_plus) << " mm, col_dist " << fixed(r.col_dist, 3) << " mm, non_col "
                << fixed(r.non_col, 1) << " %, touchness " << show(r.touchness) << " %\n";
}

// ---- stiffness ------------------------------------------------------------

void run_stiffness(Context& ctx, ConfigReader& root) {
    const std::uint64_t seed = root.unsigned64("seed", scenario::GenerateConfig{}.seed);
    const std::string skin = root.string("skin", "");
    const std::string skull = root.string("skull", "");
    const std::string target = root.string("target", "");
    const double exponent = root.number("exponent", stiffness::kDefaultExponent);
    scenario::ProxyConfig pc;
    const bool proxies = skin.empty();
    if (proxies) {
        require(skull.empty() && target.empty(), ErrorCode::validation,
                "config.skull and config.target need config.skin");
        parse_proxies(root.object("proxies"), pc);
    }
    root.finish();
    require(exponent > 0.0, ErrorCode::validation, "config.exponent must be positive");

    geom::TriMesh skin_mesh, skull_mesh, target_mesh;
    if (proxies) {
        const auto px = scenario::build_proxies(seed, pc);
        skin_mesh = *px.face->mesh;
        skull_mesh = *px.skull;
        target_mesh = skin_mesh;
    } else {
        require(!skull.empty(), ErrorCode::validation, "config.skull is required with config.skin");
        skin_mesh = geom::load_obj_mesh(ctx.in(skin));
        skull_mesh = geom::load_obj_mesh(ctx.in(skull));
        target_mesh = target.empty() ? skin_mesh : geom::load_obj_mesh(ctx.in(target));
        ctx.input(ctx.in(skin));
        ctx.input(ctx.in(skull));
        if (!target.empty()) ctx.input(ctx.in(target));
    }
    const auto map = stiffness::ssd_stiffness(skin_mesh, skull_mesh, target_mesh, exponent);
    write_json_atomic(ctx.output("stiffness.json"), stiffness_to_json(map));
    std::vector<Vec3> colors;
    for (double s : map.vertex_stiffness) colors.emplace_back(s, s, s);
    write_obj_atomic(ctx.output("stiffness.obj"), target_mesh.vertices(), target_mesh.triangles(), colors);
    const auto [lo, hi] = std::minmax_element(map.vertex_stiffness.begin(), map.vertex_stiffness.end());
    ctx.summary << "stiffness: " << map.vertex_stiffness.size() << " vertices, range [" << fixed(*lo, 3) << ", " << fixed(*hi, 3)
                << "]\n";
}

// ---- simulate -------------------------------------------------------------

std::vector<std::string> string_list(const json& j, const std::string& what) {
    if (j.is_null()) return {};
    require(j.is_array(), ErrorCode::validation, what + " must be an array of paths");
    std::vector<std::string> out;
    for (const auto& x : j) {
        require(x.is_string(), ErrorCode::validation, what + " must be an array of paths");
        out.push_back(x.get<std::string>());
    }
    return out;
}

void run_simulate(Context& ctx, ConfigReader& root) {
    root.unsigned64("seed", 0);
    const std::string sequence = root.string("sequence", "");
    const std::string template_path = root.string("template", "");
    const auto reference_paths = string_list(root.raw("reference"), "config.reference");
    const auto collider_paths = string_list(root.raw("collider"), "config.collider");
    const json stiffness_json = root.raw("stiffness");
    pbd::TrackingOptions opt;
    opt.steps_per_frame = root.integer("steps_per_frame", opt.steps_per_frame);
    parse_solver(root.object("solver"), opt.solver);
    root.finish();
    require(opt.steps_per_frame >= 1, ErrorCode::validation, "config.steps_per_frame must be >= 1");

    geom::TriMesh face_mesh;
    std::vector<Points> reference, collider;
    std::optional<geom::TriMesh> collider_mesh;
    if (!sequence.empty()) {
        require(template_path.empty() && reference_paths.empty() && collider_paths.empty(), ErrorCode::validation,
                "config.sequence excludes template, reference and collider");
        const fs::path dir = ctx.in(sequence);
        const auto index = read_sequence_index(dir);
        face_mesh = geom::load_obj_mesh(dir / index.face_topology);
        ctx.input(dir / "sequence.json");
        ctx.input(dir / index.face_topology);
        for (const auto& f : index.frames) {
            reference.push_back(geom::read_obj(dir / f.reference).vertices);
            ctx.input(dir / f.reference);
            if (!f.hand.empty()) {
                if (!collider_mesh) collider_mesh = geom::load_obj_mesh(dir / f.hand);
                collider.push_back(geom::read_obj(dir / f.hand).vertices);
                ctx.input(dir / f.hand);
            }
        }
    } else {
        require(!template_path.empty() && !reference_paths.empty(), ErrorCode::validation,
                "config.template and config.reference (or config.sequence) are required");
        face_mesh = geom::load_obj_mesh(ctx.in(template_path));
        ctx.input(ctx.in(template_path));
        for (const auto& p : reference_paths) {
            reference.push_back(geom::read_obj(ctx.in(p)).vertices);
            ctx.input(ctx.in(p));
        }
        for (const auto& p : collider_paths) {
            if (!collider_mesh) collider_mesh = geom::load_obj_mesh(ctx.in(p));
            collider.push_back(geom::read_obj(ctx.in(p)).vertices);
            ctx.input(ctx.in(p));
        }
    }
    require(collider.empty() || collider.size() == reference.size(), ErrorCode::validation,
            "collider and reference frame counts differ");
    for (std::size_t t = 0; t < reference.size(); ++t) {
        require(reference[t].size() == face_mesh.vertex_count(), ErrorCode::validation,
                "reference frame " + std::to_string(t) + ": vertex count differs from the template");
    }

    stiffness::StiffnessMap map;
    if (stiffness_json.is_null() || stiffness_json.is_number()) {
        const double s = stiffness_json.is_null() ? 1.0 : stiffness_json.get<double>();
        require(s >= 0.0 && s <= 1.0, ErrorCode::validation, "config.stiffness must be in [0, 1]");
        map = stiffness::uniform_stiffness(face_mesh, s);
    } else {
        require(stiffness_json.is_string(), ErrorCode::validation, "config.stiffness must be a path or a number");
        const fs::path p = ctx.in(stiffness_json.get<std::string>());
        map = stiffness_from_json(read_json_file(p), p.string());
        ctx.input(p);
    }
    map.validate(face_mesh);

    const auto result = pbd::simulate_tracking(face_mesh, map, reference, collider_mesh ? &*collider_mesh : nullptr,
                                               collider, opt);
    SequenceIndex index;
    index.face_topology = "face_topology.obj";
    write_obj_atomic(ctx.output(index.face_topology), face_mesh.vertices(), face_mesh.triangles());
    for (std::size_t t = 0; t < reference.size(); ++t) {
        const std::string stem = "frames/" + frame_stem(t);
        SequenceFrame f{stem + "_reference.obj", stem + "_deformed.obj", "", stem + "_displacement.json"};
        write_obj_atomic(ctx.output(f.reference), reference[t], face_mesh.triangles());
        write_obj_atomic(ctx.output(f.deformed), result.deformed[t], face_mesh.triangles());
        if (!collider.empty()) {
            f.hand = stem + "_hand.obj";
            write_obj_atomic(ctx.output(f.hand), collider[t], collider_mesh->triangles());
        }
        write_displacement(ctx.output(f.displacement), result.displacements[t]);
        index.frames.push_back(std::move(f));
    }
    write_sequence_index(ctx.out, index);
    ctx.output("sequence.json");
    write_json_atomic(ctx.output("simulation.json"),
                      {{"contact_counts", result.contact_counts}, {"max_penetration", result.max_penetration}});
    double max_disp = 0.0;
    for (const auto& d : result.displacements) max_disp = std::max(max_disp, max_norm(d));
    ctx.summary << "simulate: " << reference.size() << " frames, max displacement " << mm(max_disp) << " mm\n";
}

// ---- inspect --------------------------------------------------------------

json mesh_stats(const geom::TriMesh& mesh) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto& v : mesh.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const auto& len = mesh.rest_edge_lengths();
    double sum = 0.0;
    for (double l : len) sum += l;
    json j = {{"vertex_count", mesh.vertex_count()},
              {"triangle_count", mesh.triangle_count()},
              {"edge_count", mesh.edges().size()},
              {"bend_pair_count", mesh.bend_pairs().size()},
              {"component_count", mesh.component_count()},
              {"watertight", mesh.watertight()}};
    if (mesh.vertex_count() > 0) j["bounding_box"] = {{"min", to_json(lo)}, {"max", to_json(hi)}};
    if (!len.empty()) {
        j["edge_length"] = {{"min", *std::min_element(len.begin(), len.end())},
                            {"max", *std::max_element(len.begin(), len.end())},
                            {"mean", sum / static_cast<double>(len.size())}};
    }
    return j;
}

void run_inspect(Context& ctx, ConfigReader& root) {
    root.unsigned64("seed", 0);
    const std::string mesh = root.string("mesh", "");
    const std::string sequence = root.string("sequence", "");
    root.finish();
    require(mesh.empty() != sequence.empty(), ErrorCode::validation, "config needs exactly one of mesh and sequence");
    json out;
    if (!mesh.empty()) {
        const auto m = geom::load_obj_mesh(ctx.in(mesh));
        ctx.input(ctx.in(mesh));
        out = {{"mesh", mesh_stats(m)}};
        ctx.summary << "inspect: " << m.vertex_count() << " vertices, " << m.triangle_count() << " triangles, "
                    << (m.watertight() ? "watertight" : "open") << "\n";
    } else {
        const auto seq = load_sequence(ctx.in(sequence), FaceVariant::deformed);
        for (const auto& f : seq.files) ctx.input(f);
        json frames = json::array();
        double max_disp = 0.0;
        std::size_t contact_frames = 0;
        for (std::size_t t = 0; t < seq.face.size(); ++t) {
            const double d = max_norm(seq.displacement[t]);
            max_disp = std::max(max_disp, d);
            json f = {{"frame", t}, {"max_displacement_mm", d * metrics::kMillimetres},
                      {"hand_vertex_count", seq.hand[t].size()}};
            if (!seq.contacts.empty()) {
                const auto& c = seq.contacts[t];
                contact_frames += c.contact ? 1 : 0;
                f["contact"] = c.contact;
                f["face_contact_vertices"] = std::count_if(c.face_probs.begin(), c.face_probs.end(),
                                                           [](double p) { return p > 0.5; });
            }
            frames.push_back(f);
        }
        out = {{"face_topology", mesh_stats(seq.face_mesh)},
               {"frame_count", seq.face.size()},
               {"contact_frames", contact_frames},
               {"max_displacement_mm", max_disp * metrics::kMillimetres},
               {"frames", frames}};
        ctx.summary << "inspect: " << seq.face.size() << " frames, " << contact_frames << " contact frames, max displacement "
                    << mm(max_disp) << " mm\n";
    }
    write_json_atomic(ctx.output("inspect.json"), out);
}

} // namespace

RunResult run_command(const RunOptions& options) {
    const auto& names = subcommands();
    require(std::find(names.begin(), names.end(), options.subcommand) != names.end(), ErrorCode::invalid_argument,
            "unknown subcommand '" + options.subcommand + "'");
    require(!options.out_dir.empty(), ErrorCode::invalid_argument, "an output directory is required");
    require(options.threads >= 0, ErrorCode::invalid_argument, "thread count must be >= 0");
    const auto start = std::chrono::steady_clock::now();

    Context ctx;
    json config = json::object();
    std::string config_path;
    if (!options.config_path.empty()) {
        const fs::path path = fs::absolute(options.config_path).lexically_normal();
        config_path = path.string();
        config = read_json_file(path);
        ctx.base = path.parent_path();
        if (config.is_object() && config.value("format", "") == kManifestFormat) {
            require(config.value("subcommand", "") == options.subcommand, ErrorCode::validation,
                    config_path + ": manifest was written by '" + config.value("subcommand", "") + "'");
            require(config.contains("config") && config.contains("config_dir"), ErrorCode::validation,
                    config_path + ": manifest lacks config or config_dir");
            ctx.base = fs::path(config["config_dir"].get<std::string>());
            config = config["config"];
        }
    } else {
        ctx.base = fs::current_path();
    }
    require(config.is_object(), ErrorCode::validation, "config must be a JSON object");
    if (options.seed) config["seed"] = *options.seed;

    fs::create_directories(options.out_dir);
    ctx.out = fs::absolute(options.out_dir).lexically_normal();
    if (options.threads > 0) set_thread_count(options.threads);

    ConfigReader root(config, "config");
    if (options.subcommand == "gen-data") run_gen_data(ctx, root);
    else if (options.subcommand == "fit") run_fit(ctx, root);
    else if (options.subcommand == "eval") run_eval(ctx, root);
    else if (options.subcommand == "stiffness") run_stiffness(ctx, root);
    else if (options.subcommand == "simulate") run_simulate(ctx, root);
    else run_inspect(ctx, root);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"format", kManifestFormat},
                     {"subcommand", options.subcommand},
                     {"tool_version", DEFCAP_VERSION},
                     {"config_path", config_path.empty() ? json(nullptr) : json(config_path)},
                     {"config_dir", ctx.base.string()},
                     {"config", config},
                     {"seed", config.contains("seed") ? config["seed"] : json(nullptr)},
                     {"threads", thread_count()},
                     {"inputs", ctx.inputs},
                     {"outputs", ctx.outputs},
                     {"wall_time_s", wall}};
    write_json_atomic(ctx.out / "manifest.json", manifest);
    return {manifest, ctx.summary.str()};
}

} // namespace defcap::app

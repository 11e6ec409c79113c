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

#include "cube/service.hpp"

#include "cube/editing.hpp"
#include "cube/error.hpp"
#include "cube/model_io.hpp"

#include <httplib.h>
#include <json.hpp>

#include <mutex>

namespace cube {

using nlohmann::json;

Session::Session(CubeModel model) : origin_(model), model_(std::move(model))
{
    model_.validate();
    stencils_ = sample_stencils(model_);
    redecode_all();
}

void Session::redecode_all()
{
    mesh_ = decode_mesh(model_);
}

std::uint64_t Session::revision() const
{
    std::shared_lock lock(mutex_);
    return revision_;
}

Session::Snapshot Session::snapshot() const
{
    std::shared_lock lock(mutex_);
    return {revision_, mesh_};
}

CubeModel Session::model() const
{
    std::shared_lock lock(mutex_);
    return model_;
}

std::vector<Index3> Session::dirty_controls() const
{
    std::shared_lock lock(mutex_);
    std::vector<Index3> dirty;
    const auto& lat = model_.lattice;
    const auto& base = origin_.lattice;
    const auto d = static_cast<std::size_t>(lat.dim());
    for (std::size_t n = 0; n < lat.num_controls(); ++n) {
        const bool same = lat.weight(n) == base.weight(n) &&
                          std::equal(lat.features().begin() + n * d, lat.features().begin() + (n + 1) * d,
                                     base.features().begin() + n * d);
        if (!same)
            dirty.push_back(lat.unflatten(n));
    }
    return dirty;
}

Session::PartialUpdate Session::displace(const Index3& c, const Eigen::Vector3d& delta,
                                         std::optional<std::uint64_t> expected_revision)
{
    std::unique_lock lock(mutex_);
    if (expected_revision && *expected_revision != revision_)
        throw StaleRevisionError("revision " + std::to_string(*expected_revision) + " is stale (current " +
                                 std::to_string(revision_) + ")");
    model_ = displace_control(model_, c, delta);

    PartialUpdate update;
    for (std::size_t n = 0; n < stencils_.size(); ++n) {
        if (!stencil_covers(stencils_[n], c))
            continue;
        const Eigen::Vector3d x = decode_point(model_, stencils_[n]).out;
        mesh_.vertices[n] = x;
        update.vertices.push_back(static_cast<std::uint32_t>(n));
        update.positions.push_back(x);
    }
    update.revision = ++revision_;
    return update;
}

std::uint64_t Session::interpolate_with(const CubeModel& other, double alpha,
                                        std::optional<std::uint64_t> expected_revision)
{
    std::unique_lock lock(mutex_);
    if (expected_revision && *expected_revision != revision_)
        throw StaleRevisionError("revision " + std::to_string(*expected_revision) + " is stale (current " +
                                 std::to_string(revision_) + ")");
    model_ = interpolate(origin_, other, alpha);
    redecode_all();
    return ++revision_;
}

std::uint64_t Session::reset()
{
    std::unique_lock lock(mutex_);
    model_ = origin_;
    redecode_all();
    return ++revision_;
}

void Session::save(const std::filesystem::path& path) const
{
    std::shared_lock lock(mutex_);
    save_model(model_, path);
}

namespace {

json flat_vertices(const std::vector<Eigen::Vector3d>& vs)
{
    json arr = json::array();
    for (const auto& v : vs) {
        arr.push_back(v.x());
        arr.push_back(v.y());
        arr.push_back(v.z());
    }
    return arr;
}

json flat_faces(const std::vector<Face>& fs)
{
    json arr = json::array();
    for (const auto& f : fs) {
        arr.push_back(f[0]);
        arr.push_back(f[1]);
        arr.push_back(f[2]);
    }
    return arr;
}

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message)
{
    reply(res, status, json{{"error", message}});
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty())
        return json::object();
    json body = json::parse(req.body);
    if (!body.is_object())
        throw json::type_error::create(302, "request body must be a JSON object", nullptr);
    return body;
}

std::optional<std::uint64_t> optional_revision(const json& body)
{
    if (!body.contains("rev"))
        return std::nullopt;
    return body.at("rev").get<std::uint64_t>();
}

/// Runs a handler, mapping exceptions onto status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn)
{
    try {
        fn();
    } catch (const json::exception& e) {
        reply_error(res, 400, std::string("malformed request: ") + e.what());
    } catch (const StaleRevisionError& e) {
        reply_error(res, 409, e.what());
    } catch (const IndexError& e) {
        reply_error(res, 404, e.what());
    } catch (const Error& e) {
        reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
        reply_error(res, 500, e.what());
    }
}

} // namespace

EditorService::EditorService(CubeModel model) : session_(std::move(model)), server_(std::make_unique<httplib::Server>())
{
    install_routes();
}

EditorService::~EditorService()
{
    stop();
}

void EditorService::install_routes()
{
    auto& srv = *server_;

    srv.Get("/model/meta", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            const auto model = session_.model();
            reply(res, 200,
                  json{{"m", model.lattice.m()},
                       {"d", model.lattice.dim()},
                       {"r", model.knots.degree()},
                       {"controls", model.lattice.num_controls()},
                       {"vertices", model.tmpl.samples.size()},
                       {"faces", model.tmpl.faces.size()},
                       {"revision", session_.revision()}});
        });
    });

    srv.Get("/lattice", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            const auto model = session_.model();
            const auto& lat = model.lattice;
            json positions = json::array();
            json weights = json::array();
            for (std::size_t n = 0; n < lat.num_controls(); ++n) {
                const auto f = lat.feature(n);
                positions.push_back(f[0]);
                positions.push_back(f[1]);
                positions.push_back(f[2]);
                weights.push_back(lat.weight(n));
            }
            json dirty = json::array();
            for (const auto& c : session_.dirty_controls())
                dirty.push_back({c[0] + 1, c[1] + 1, c[2] + 1});
            reply(res, 200,
                  json{{"m", lat.m()}, {"positions", positions}, {"weights", weights}, {"dirty", dirty},
                       {"revision", session_.revision()}});
        });
    });

    srv.Get("/mesh", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (req.has_param("rev")) {
                std::uint64_t rev = 0;
                try {
                    rev = std::stoull(req.get_param_value("rev"));
                } catch (const std::exception&) {
                    reply_error(res, 400, "rev must be a non-negative integer");
                    return;
                }
                if (rev == session_.revision()) {
                    res.status = 304;
                    return;
                }
            }
            const auto snap = session_.snapshot();
            reply(res, 200,
                  json{{"revision", snap.revision},
                       {"vertices", flat_vertices(snap.mesh.vertices)},
                       {"faces", flat_faces(snap.mesh.faces)}});
        });
    });

    srv.Post(R"(/control/(\d+)/(\d+)/(\d+)/displace)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            Index3 c{};
            for (int a = 0; a < 3; ++a) {
                const auto text = req.matches[a + 1].str();
                if (text.size() > 9)
                    throw IndexError("control index out of range");
                c[a] = std::stoi(text) - 1;
            }
            const int m = session_.model().lattice.m();
            for (int a : c) {
                if (a < 0 || a >= m)
                    throw IndexError("control index out of range (indices are 1-based, m = " + std::to_string(m) + ")");
            }
            const json body = parse_body(req);
            const Eigen::Vector3d delta(body.at("dx").get<double>(), body.at("dy").get<double>(),
                                        body.at("dz").get<double>());
            const auto update = session_.displace(c, delta, optional_revision(body));
            reply(res, 200,
                  json{{"revision", update.revision},
                       {"affected", update.vertices},
                       {"positions", flat_vertices(update.positions)}});
        });
    });

    srv.Post("/interp", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            const auto path = body.at("other_model_path").get<std::string>();
            const double alpha = body.at("alpha").get<double>();
            const CubeModel other = load_model(path);
            const auto rev = session_.interpolate_with(other, alpha, optional_revision(body));
            reply(res, 200, json{{"revision", rev}});
        });
    });

    srv.Post("/save", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            const auto path = body.at("path").get<std::string>();
            session_.save(path);
            reply(res, 200, json{{"revision", session_.revision()}, {"path", path}});
        });
    });

    srv.Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, json{{"revision", session_.reset()}}); });
    });
}

int EditorService::bind(const std::string& host, int port)
{
    if (port == 0)
        return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool EditorService::listen()
{
    return server_->listen_after_bind();
}

void EditorService::stop()
{
    if (server_)
        server_->stop();
}

void EditorService::wait_until_ready() const
{
    server_->wait_until_ready();
}

} // namespace cube

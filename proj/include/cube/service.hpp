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

#pragma once

#include "cube/error.hpp"
#include "cube/model.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace cube {

/// A conditional mutation named a revision that is no longer current.
class StaleRevisionError : public Error
{
public:
    using Error::Error;
};

/**
 * Live editing state around one model. Mutations are serialized behind a
 * writer lock and bump the revision; readers get consistent snapshots of the
 * decoded mesh cache. Control indices are 0-based here.
 */
class Session
{
public:
    explicit Session(CubeModel model);

    struct Snapshot
    {
        std::uint64_t revision = 0;
        TriMesh mesh;
    };

    struct PartialUpdate
    {
        std::uint64_t revision = 0;
        std::vector<std::uint32_t> vertices;    ///< indices of samples whose window covers the control
        std::vector<Eigen::Vector3d> positions; ///< new positions of `vertices`
    };

    std::uint64_t revision() const;
    Snapshot snapshot() const;
    CubeModel model() const;
    /// Controls changed relative to the loaded model.
    std::vector<Index3> dirty_controls() const;

    /// displace_control plus an incremental re-decode of the covered samples.
    /// Throws StaleRevisionError if `expected_revision` is given and not current.
    PartialUpdate displace(const Index3& c, const Eigen::Vector3d& delta,
                           std::optional<std::uint64_t> expected_revision = std::nullopt);

    /// Replace the model by interpolate(loaded model, other, alpha).
    std::uint64_t interpolate_with(const CubeModel& other, double alpha,
                                   std::optional<std::uint64_t> expected_revision = std::nullopt);

    /// Back to the loaded model.
    std::uint64_t reset();

    void save(const std::filesystem::path& path) const;

private:
    void redecode_all();

    mutable std::shared_mutex mutex_;
    CubeModel origin_;
    CubeModel model_;
    std::uint64_t revision_ = 0;
    TriMesh mesh_;
    std::vector<Stencil> stencils_;
};

/**
 * HTTP/1.1 front end of a Session. Control indices in URLs are 1-based.
 *
 *   GET  /model/meta                       m, d, r, counts, revision
 *   GET  /lattice                          control positions c[0:3] and weights
 *   GET  /mesh[?rev=R]                     vertices and faces; 304 when R is current
 *   POST /control/{i}/{j}/{k}/displace     {"dx","dy","dz"[,"rev"]} -> partial update
 *   POST /interp                           {"other_model_path","alpha"[,"rev"]}
 *   POST /save                             {"path"}
 *   POST /reset
 *
 * Errors: 400 malformed body, 404 bad indices, 409 stale revision.
 */
class EditorService
{
public:
    explicit EditorService(CubeModel model);
    ~EditorService();

    EditorService(const EditorService&) = delete;
    EditorService& operator=(const EditorService&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1 on failure.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool listen();
    void stop();
    void wait_until_ready() const;

    Session& session() noexcept { return session_; }

private:
    void install_routes();

    Session session_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace cube

// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>
#include <cmath>

#include "mssteer/geometry.hpp"

namespace mssteer {

Vec3 Superposition::apply(const Vec3& p) const {
    const auto& r = rotation;
    return Vec3{r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + translation.x,
                r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + translation.y,
                r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + translation.z};
}

Superposition kabsch_superpose(std::span<const Vec3> moving, std::span<const Vec3> target) {
    if (moving.size() != target.size())
        throw correspondence_error("point sets differ in size: " + std::to_string(moving.size()) +
                                   " vs " + std::to_string(target.size()));
    const std::size_t n = moving.size();
    if (n < 3) throw degeneracy_error("superposition needs at least 3 paired points");

    Eigen::Vector3d cm = Eigen::Vector3d::Zero();
    Eigen::Vector3d ct = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cm += Eigen::Vector3d(moving[i].x, moving[i].y, moving[i].z);
        ct += Eigen::Vector3d(target[i].x, target[i].y, target[i].z);
    }
    cm /= static_cast<double>(n);
    ct /= static_cast<double>(n);

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector3d m(moving[i].x - cm.x(), moving[i].y - cm.y(), moving[i].z - cm.z());
        Eigen::Vector3d t(target[i].x - ct.x(), target[i].y - ct.y(), target[i].z - ct.z());
        h += m * t.transpose();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(1) <= sv(0) * 1e-12)
        throw degeneracy_error("superposition is underdetermined (collinear or coincident points)");

    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = ((v * u.transpose()).determinant() < 0.0) ? -1.0 : 1.0;
    Eigen::Matrix3d rot = v * d * u.transpose();
    Eigen::Vector3d trans = ct - rot * cm;

    Superposition result;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) result.rotation[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = rot(r, c);
    result.translation = Vec3{trans.x(), trans.y(), trans.z()};

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 moved = result.apply(moving[i]);
        ss += norm_sq(moved - target[i]);
    }
    result.rmsd = std::sqrt(ss / static_cast<double>(n));
    return result;
}

}  // namespace mssteer

#pragma once

#include "berrypick/image.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

/// Median blur of a depth image over a `window` x `window` neighbourhood.
///
/// Only valid (non-zero) samples vote. A pixel whose window holds fewer
/// valid samples than invalid ones becomes invalid, so isolated returns are
/// outvoted. With an even number of valid samples the lower median is taken,
/// so the output never contains a value absent from the input. Borders use
/// replicated edges.
DepthImage median_filter(const DepthImage &depth, int window = 5);

/// Back-projects every valid depth pixel through the pinhole model. Points
/// carry their pixel colour and source pixel.
PointCloud project_point_cloud(const RgbImage &rgb, const DepthImage &depth,
                               const CameraIntrinsics &k);

/// Bins points by floor(p / voxel_size) and replaces each bin holding at least
/// `min_points` members with their centroid. Smaller bins are dropped.
///
/// The emitted point takes the mean member colour, the most frequent member
/// source pixel and the most frequent instance id. Ties go to the member
/// closest to the centroid. Output is ordered by voxel index.
PointCloud voxel_downsample(const PointCloud &cloud, const VoxelParams &params);

/// Points whose source pixel is set in `mask`, relabelled with the mask's
/// instance id. Throws ContractError if a point has no source pixel or one
/// outside the mask.
PointCloud extract_masked(const PointCloud &cloud, const InstanceMask &mask);

/// Statistical outlier removal on mean k-NN distance.
PointCloud remove_outliers(const PointCloud &cloud,
                           const OutlierParams &params);

} // namespace berrypick

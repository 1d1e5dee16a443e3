#pragma once

#include "occlumix/core_types.hpp"
#include "occlumix/dataset_io.hpp"
#include "occlumix/fid_eval.hpp"
#include "occlumix/flow_metrics.hpp"
#include "occlumix/generative_losses.hpp"
#include "occlumix/mask_algebra.hpp"
#include "occlumix/occlumix_compose.hpp"
#include "occlumix/parallel.hpp"
#include "occlumix/random.hpp"
#include "occlumix/texture_glcm.hpp"
#include "occlumix/batch.hpp"

#pragma once

#include "mfg/fp_particles.hpp"
#include "mfg/hjb_mild.hpp"
#include "mfg/measure_kit.hpp"
#include "mfg/mfg_loop.hpp"
#include "mfg/model_zoo.hpp"
#include "mfg/ou_kernel.hpp"
#include "mfg/spectral_core.hpp"

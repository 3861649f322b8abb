#pragma once

#include "ghostkit/acquisition.hpp"
#include "ghostkit/config.hpp"
#include "ghostkit/errors.hpp"
#include "ghostkit/evaluation.hpp"
#include "ghostkit/fft.hpp"
#include "ghostkit/grid.hpp"
#include "ghostkit/image_io.hpp"
#include "ghostkit/parallel.hpp"
#include "ghostkit/recon.hpp"
#include "ghostkit/rng.hpp"
#include "ghostkit/scene.hpp"
#include "ghostkit/speckle.hpp"
#include "ghostkit/thresholding.hpp"

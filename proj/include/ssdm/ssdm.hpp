#pragma once

// Convenience include for the whole library.

#include "ssdm/adamw.hpp"
#include "ssdm/checkpoint.hpp"
#include "ssdm/common.hpp"
#include "ssdm/config.hpp"
#include "ssdm/dataset.hpp"
#include "ssdm/denoiser.hpp"
#include "ssdm/gaussian_prior.hpp"
#include "ssdm/generators.hpp"
#include "ssdm/layout.hpp"
#include "ssdm/log.hpp"
#include "ssdm/losses.hpp"
#include "ssdm/metrics.hpp"
#include "ssdm/motion.hpp"
#include "ssdm/motion_file.hpp"
#include "ssdm/rng.hpp"
#include "ssdm/sampler.hpp"
#include "ssdm/schedule.hpp"
#include "ssdm/sequence_init.hpp"
#include "ssdm/skeleton.hpp"
#include "ssdm/ssd.hpp"
#include "ssdm/toy_denoiser.hpp"
#include "ssdm/train.hpp"
#include "ssdm/window.hpp"

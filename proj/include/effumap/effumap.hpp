#ifndef EFFUMAP_EFFUMAP_HPP
#define EFFUMAP_EFFUMAP_HPP

/**
 * @file effumap.hpp
 *
 * @brief Umbrella header.
 */

#include "common.hpp"
#include "config.hpp"
#include "datagen.hpp"
#include "kernel.hpp"
#include "losses.hpp"
#include "optimize.hpp"
#include "optimizer.hpp"
#include "pumap_oracle.hpp"
#include "simgraph.hpp"
#include "svg.hpp"

#endif

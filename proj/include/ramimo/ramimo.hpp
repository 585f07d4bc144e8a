#pragma once

#include "ramimo/bussgang.hpp"
#include "ramimo/channel.hpp"
#include "ramimo/combining.hpp"
#include "ramimo/config.hpp"
#include "ramimo/io.hpp"
#include "ramimo/mc_oracle.hpp"
#include "ramimo/scenario.hpp"
#include "ramimo/seed.hpp"
#include "ramimo/sweep.hpp"
#include "ramimo/types.hpp"
#include "ramimo/validate.hpp"

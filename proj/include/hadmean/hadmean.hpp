#pragma once

#include "hadmean/geometry.hpp"
#include "hadmean/mesh.hpp"
#include "hadmean/assembly.hpp"
#include "hadmean/spectral.hpp"
#include "hadmean/experiments.hpp"
#include "hadmean/io.hpp"

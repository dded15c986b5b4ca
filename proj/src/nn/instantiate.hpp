#pragma once

#define CROWDLOC_INSTANTIATE_FT(MACRO) \
  MACRO(float)                         \
  MACRO(double)

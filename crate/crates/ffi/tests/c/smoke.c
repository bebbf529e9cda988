#include <math.h>
#include <stdio.h>

#include "fusetrack.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  FtQuat id = {1.0, 0.0, 0.0, 0.0};
  FtVec3 zero = {0.0, 0.0, 0.0};

  FtVec3 accel = {0.0, 0.0, 9.81};
  FtVec3 mag = {22.0, 0.0, -42.0};
  FtQuat q_am;
  CHECK(ft_accel_mag_orientation(&accel, &mag, &q_am) == FT_STATUS_OK);
  double dist = -1.0;
  CHECK(ft_quat_angular_distance(&q_am, &id, &dist) == FT_STATUS_OK);
  CHECK(dist < 1e-9);

  FtOrientEkf *orient = NULL;
  CHECK(ft_orient_new(NULL, &orient) == FT_STATUS_OK);
  FtOrientEstimate oe;
  CHECK(ft_orient_state(orient, &oe) == FT_STATUS_NOT_READY);
  for (int i = 0; i < 50; ++i) {
    CHECK(ft_orient_update(orient, &zero, &id, &oe) == FT_STATUS_OK);
  }
  CHECK(fabs(oe.q.w - 1.0) < 1e-9);
  ft_orient_free(orient);

  FtFusedTuning tuning;
  CHECK(ft_fused_default_tuning(&tuning) == FT_STATUS_OK);
  tuning.k = -1.0;
  FtFusedEkf *fused = NULL;
  CHECK(ft_fused_new(&tuning, &fused) == FT_STATUS_INVALID_ARGUMENT);
  CHECK(fused == NULL);
  CHECK(ft_last_error_message() != NULL);
  CHECK(ft_fused_new(NULL, &fused) == FT_STATUS_OK);

  FtFusedMeasurement z = {zero, id, id, {1.0, 2.0, 3.0}, true, false, id};
  FtFusedEstimate fe;
  for (int i = 0; i < 30; ++i) {
    CHECK(ft_fused_update(fused, &z, &fe) == FT_STATUS_OK);
  }
  CHECK(fabs(fe.t.x - 1.0) < 1e-6 && fabs(fe.t.y - 2.0) < 1e-6 && fabs(fe.t.z - 3.0) < 1e-6);
  CHECK(!fe.occluded);
  ft_fused_free(fused);

  FtRegionTracker *region = NULL;
  CHECK(ft_region_new(NULL, &region) == FT_STATUS_OK);
  FtRegionEstimate re;
  CHECK(ft_region_step(region, 100.0, 50.0, true, 0.0333, &re) == FT_STATUS_NOT_READY);
  CHECK(ft_region_step(region, 101.0, 50.0, true, 0.0333, &re) == FT_STATUS_OK);
  CHECK(ft_region_step(region, 0.0, 0.0, false, 0.0333, &re) == FT_STATUS_OK);
  CHECK(re.cx > 101.0);
  ft_region_free(region);

  CHECK(ft_orient_update(NULL, &zero, &id, NULL) == FT_STATUS_NULL_POINTER);
  printf("ok %s\n", ft_version());
  return 0;
}

import math

# Linear solves
DIRECT_SOLVE_LIMIT = 50_000
KRYLOV_RTOL = 1e-10
KRYLOV_MAX_ITER = 2000
GMRES_RESTART = 100
SINGULAR_PIVOT = 1e-13  # relative to the largest pivot of a direct factorization

# Nonlinear solves
NEWTON_RTOL = 1e-8
NEWTON_ABS_FACTOR = 1e-10  # times E_ref * h_ref**2
MAX_NEWTON = 25
MAX_UZAWA = 50
MAX_INTERLEAVED = 200
UZAWA_TRACTION_TOL = 1e-6
MAX_BACKTRACKS = 8
LINE_SEARCH_DECREASE = 1e-4  # sufficient-decrease factor on the residual norm

# Inf-sup eigenproblem
INFSUP_DENSE_LIMIT = 3000  # multiplier dofs solved with a dense generalized eigensolver
INFSUP_BLOCK = 4
INFSUP_RTOL = 1e-8
INFSUP_MAX_ITER = 500

# Contact
DEFAULT_PENALTY_SCALE = 10.0
ZERO_SLIP_FACTOR = 1e-14
KKT_RTOL = 1e-5

# Geometry tolerances
FRAME_TOL = 1e-12
COINCIDENCE_TOL = 1e-12  # relative to mesh diameter
GRID_TOL = 1e-9  # relative to extent

# Output
FLOAT_DIGITS = 17
BOX_SETS = ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")

DEG = math.pi / 180.0

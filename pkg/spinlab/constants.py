import math

# numerical tolerances
HERMITIAN_TOL = 1e-12  # elementwise |H - H^dagger|
UNITARY_TOL = 1e-10  # elementwise |U^dagger U - 1|
STATE_NORM_TOL = 1e-10  # accepted drift of |psi| away from 1 after long propagations
QUBIT_NORM_TOL = 1e-12
MIRROR_TOL = 1e-12  # mirror symmetry of couplings and fields
INVARIANCE_TOL = 1e-8  # max leakage for an invariant mediator sector
ENTROPY_CUTOFF = 1e-14  # eigenvalues below this count as zero
PROBABILITY_TOL = 1e-10  # deterministic readout

# full 2^N space
MAX_FULL_SPINS = 16
FULL_CHECK_MAX_SPINS = 12  # verify_design cross-checks in the full space up to this size

# three-spin chain
SQRT2 = math.sqrt(2.0)
# order used when displaying 8x8 three-spin matrices: mediator bit first, then spins 1 and 3
DISPLAY_ORDER_3SPIN = ("000", "001", "100", "101", "010", "011", "110", "111")

# scans
FINE_GRID_SPACING = 0.01  # in units of 1/omega, windows up to FINE_GRID_MAX_WINDOW
COARSE_GRID_SPACING = 0.05
FINE_GRID_MAX_WINDOW = 100.0
DEFAULT_REFINE_TOL = 1e-6
PEAK_REPORT_THRESHOLD = 0.99  # F above which local maxima are listed
PEAK_TIE_TOL = 1e-12
COMPARE_WINDOW = 2000.0  # default upper edge for model comparisons, units of 1/omega
TUNE_WINDOW = 20.0

# golden section
INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

# bessel backward recurrence
BESSEL_START_MARGIN = 30  # extra orders above max(n, z)
BESSEL_START_SCALE = 60  # adds sqrt(scale * max(n, z)) orders
BESSEL_SEED = 1e-30
BESSEL_RESCALE_AT = 1e250

# long-chain asymptotics
PEAK_TIME_SHIFT = 0.8089  # 2 omega t0 = N + shift * N^(1/3)
PEAK_AMPLITUDE = 2.6998  # f(t0) ~ amplitude * N^(-1/3)
ASYMPTOTIC_MIN_SPINS = 20
RATIO_MIN_SPINS = 50

# homogeneous chains that coincide with an engineered design, as rate / omega
HOMOGENEOUS_DESIGN_RATES = {3: 2 * SQRT2, 4: 2.0, 6: SQRT2}

# concurrency
DEFAULT_WORKERS = 1

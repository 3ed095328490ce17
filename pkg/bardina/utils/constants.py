class Commands:
    TRUTH = "truth"
    ASSIMILATE = "assimilate"
    RECOVER = "recover"
    CHECK_CONDITIONS = "check-conditions"
    REPORT = "report"


class ExitCodes:
    OK = 0
    ERROR = 1
    DEGENERATE = 2
    INFEASIBLE = 3


class Sections:
    SPECTRAL = "spectral"
    TRUTH = "truth"
    NUDGING = "nudging"
    RECOVERY = "recovery"
    HARNESS = "harness"
    CONFIG = "config"
    SNAPSHOT = "snapshot"
    REPORT = "report"
    COMMAND = "command"


# Порядок условий теоремы в отчетах и в столбце conditions_passed
CONDITION_CODES = ("4.3", "4.4", "4.5", "4.6", "4.7", "4.8", "4.9", "4.10")

DEGENERATE_EXPLANATION = (
    "recovery stopped: u_t - nu*Lap(u) vanishes on the observed modes, "
    "alpha no longer influences the dynamics and the algorithm must be stopped"
)

from bardina.handlers import (
    truth,
    assimilate,
    recover,
    check_conditions,
    report
)

handlers = [
    truth.dp,
    assimilate.dp,
    recover.dp,
    check_conditions.dp,
    report.dp
]

__all__ = ["handlers"]

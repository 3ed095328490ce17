"""
Точка входа командной строки: python -m bardina.app <subcommand> --config FILE [key=value ...]
"""
import sys
from typing import Optional, Sequence

from bardina.core.config import settings
from bardina.instance import init_app
from bardina.handlers import handlers


def main(argv: Optional[Sequence[str]] = None) -> int:
    app = init_app(log_dir=settings.log_dir, log_level=settings.log_level)
    app.setup(commands=handlers)
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())

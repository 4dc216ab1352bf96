"""Allow ``python -m qcap``."""

from .cli import main

main()

import sys
import logging
from typing import Optional, Sequence

# Configure logging
logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger("main")

try:
    from src.utils.env_setup import setup_env_file
    setup_env_file()
except Exception as e:
    logger.warning(f"Could not setup environment file: {e}")


from src.backend.cli import render, run  # noqa: E402


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the qmrational command line.
    Prints the JSON report to stdout and a summary to stderr.
    """
    args = list(argv) if argv is not None else sys.argv[1:]
    result = run(args)
    stdout, stderr = render(result, json_only="--json-only" in args)
    if stdout:
        print(stdout)
    if stderr:
        print(stderr, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception as e:
        logger.error(f"Fatal error in main: {e}", exc_info=True)
        sys.exit(70)

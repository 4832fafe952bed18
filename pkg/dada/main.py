import sys
from typing import Optional, Sequence

import click

from .commands import cli
from .core.errors import DadaError
from .core.logging import logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 3


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行入口

    退出码：0 成功，1 用法错误，2 数据/校验错误，3 内部错误
    """
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="dada", standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except DadaError as exc:
        # 统一的错误处理
        logger.error(f"{exc.error_code}: {exc.message}")
        click.echo(f"error: {exc.message}", err=True)
        return exc.exit_code
    except Exception as exc:
        # 全局异常处理
        logger.exception(f"Unhandled exception: {str(exc)}")
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

import click

from ..core.config import settings
from . import diagnose, evaluate, gen, sweep, train


@click.group(name="dada")
@click.version_option(version=settings.TOOL_VERSION, prog_name=settings.APP_NAME)
def cli():
    """DADA 领域自适应桌面工具包"""


# 添加数据生成命令
cli.add_command(gen.gen)

# 添加训练命令
cli.add_command(train.train)

# 添加评估命令
cli.add_command(evaluate.evaluate)

# 添加诊断命令
cli.add_command(diagnose.diagnose)

# 添加扫描命令
cli.add_command(sweep.sweep)

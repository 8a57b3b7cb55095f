# main.py
"""
主程序入口
配置日志后把命令行交给 ui.cli
"""

import logging
import sys

from ui import cli


def main(argv=None):
    """
    主函数，返回退出码
    日志写到标准错误，标准输出只留给 JSON 报告
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    return cli.run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())

"""
文件安全验证模块
提供设计源文件、Verilog 文件和输出目录的路径检查
"""

import os
import re
import logging
from pathlib import Path
from typing import List, Optional


class FileValidator:
    """文件安全验证器"""

    # 设计源文件扩展名
    SOURCE_EXTENSIONS = {'.vpy'}

    # Verilog 文件扩展名
    VERILOG_EXTENSIONS = {'.v'}

    # 最大文件大小限制（10MB）
    MAX_FILE_SIZE = 10 * 1024 * 1024

    @staticmethod
    def validate_file_path(file_path: str, allowed_extensions: Optional[List[str]] = None) -> bool:
        """
        验证文件路径的安全性

        Args:
            file_path: 要验证的文件路径
            allowed_extensions: 允许的文件扩展名列表

        Returns:
            bool: 文件存在、可读、扩展名和大小合规时为 True
        """
        if not file_path or not isinstance(file_path, (str, os.PathLike)):
            return False

        try:
            path = Path(file_path).resolve()

            # 检查是否是文件（不是目录）
            if not path.is_file():
                return False

            # 检查文件扩展名
            if allowed_extensions:
                if path.suffix.lower() not in [ext.lower() for ext in allowed_extensions]:
                    return False

            # 检查文件大小
            if path.stat().st_size > FileValidator.MAX_FILE_SIZE:
                return False

            # 检查文件读取权限
            if not os.access(path, os.R_OK):
                return False

            return True

        except (OSError, ValueError) as e:
            logging.warning(f"路径验证失败: {file_path}, 错误: {e}")
            return False

    @staticmethod
    def validate_source_file(file_path: str) -> bool:
        """验证 .vpy 设计源文件"""
        return FileValidator.validate_file_path(file_path, list(FileValidator.SOURCE_EXTENSIONS))

    @staticmethod
    def validate_verilog_file(file_path: str) -> bool:
        """验证待注册到硬件库的 .v 文件"""
        return FileValidator.validate_file_path(file_path, list(FileValidator.VERILOG_EXTENSIONS))

    @staticmethod
    def validate_output_directory(dir_path: str) -> bool:
        """
        验证输出目录：已存在时必须是可写目录，不存在时其最近的已存在父目录必须可写

        Args:
            dir_path: 输出目录路径

        Returns:
            bool: 目录是否可用于写入构建产物
        """
        if not dir_path:
            return False

        try:
            path = Path(dir_path).resolve()
            if path.exists():
                return path.is_dir() and os.access(path, os.W_OK)

            parent = path.parent
            while not parent.exists() and parent != parent.parent:
                parent = parent.parent
            return parent.is_dir() and os.access(parent, os.W_OK)

        except (OSError, ValueError) as e:
            logging.warning(f"目录验证失败: {dir_path}, 错误: {e}")
            return False

    @staticmethod
    def sanitize_identifier(name: str) -> str:
        """
        将任意名称转换为合法的 Verilog 标识符

        Args:
            name: 原始名称（如文件名主干）

        Returns:
            str: 只含字母、数字、下划线且不以数字开头的名称
        """
        safe = re.sub(r'[^A-Za-z0-9_]', '_', name or '')
        if not safe:
            return "design"
        if safe[0].isdigit():
            safe = f"d_{safe}"
        return safe

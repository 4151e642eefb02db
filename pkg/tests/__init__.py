# hlsgen 测试包
"""
hlsgen 测试基础设施

覆盖范围：
- 各编译阶段的单元测试（tests/unit/）
- 示例设计的端到端验收测试
- 命令行集成测试
- 性能与内存基准测试
"""

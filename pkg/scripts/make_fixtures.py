"""Regenerate the template-built fixtures in src/opinionmon/data/.

Writes comments.jsonl (ingest input), nb_train.jsonl (labeled token lists)
and truth.jsonl (hand-label style truth for the eval harness). Output is a
pure function of SEED; the committed files were produced by this script.
"""

import json
import random
from pathlib import Path

SEED = 20200201
DATA = Path(__file__).resolve().parents[1] / "src" / "opinionmon" / "data"

# (segmented clause, polarity, intended dominant emotion)
CLAUSES = [
    ("希望 疫情 早日 结束", "positive", "Hopeful"),
    ("我们 一定 能 战胜 疫情", "positive", "Hopeful"),
    ("相信 春天 一定 会 来", "positive", "Hopeful"),
    ("武汉 加油", "positive", "Hopeful"),
    ("期待 早日 见面", "positive", "Hopeful"),
    ("我 对 未来 充满 信心", "positive", "Hopeful"),
    ("为 医护 人员 祈福", "positive", "Hopeful"),
    ("看到 病人 出院 我 很 开心", "positive", "Happy"),
    ("家人 都 平安 我 很 高兴", "positive", "Happy"),
    ("今天 特别 快乐", "positive", "Happy"),
    ("网友 纷纷 为 医生 点赞", "positive", "Happy"),
    ("这 是 一个 令人 感动 的 故事", "positive", "Happy"),
    ("心里 很 难过", "negative", "Depressed"),
    ("这个 消息 太 让 人 伤心 了", "negative", "Depressed"),
    ("空荡荡 的 街道 让 人 压抑", "negative", "Depressed"),
    ("隔离 在 家里 有点 无聊", "negative", "Depressed"),
    ("这种 行为 让 人 非常 愤怒", "negative", "Angry"),
    ("有些 人 不 戴 口罩 真的 可恶", "negative", "Angry"),
    ("居然 有 人 涨价 太 气愤 了", "negative", "Angry"),
    ("病毒 的 传播 太 可怕 了", "negative", "Frightened"),
    ("我 非常 担心 家人 的 健康", "negative", "Frightened"),
    ("很多 人 感到 焦虑 和 恐慌", "negative", "Frightened"),
    ("这样 的 做法 让 人 失望", "negative", "Disappointed"),
    ("这个 结果 很 遗憾", "negative", "Disappointed"),
    ("听到 这个 消息 我 很 震惊", "negative", "Shocked"),
    ("我 不 害怕", "positive", "Hopeful"),
    ("大家 不要 恐慌", "positive", "Hopeful"),
    ("一点 也 不 开心", "negative", "Depressed"),
]

# no lexicon words: only the NB fallback can judge these
SILENT = [
    ("终于 等到 了 解封 的 消息", "positive", "Hopeful"),
    ("商店 开始 恢复 营业", "positive", "Hopeful"),
    ("孩子 们 终于 可以 回 学校 了", "positive", "Happy"),
    ("超市 的 口罩 已经 卖完 了", "negative", "Depressed"),
    ("确诊 的 人数 还 在 增加", "negative", "Frightened"),
    ("医院 的 床位 不够 用", "negative", "Frightened"),
]

TOPICS = ["疫情", "口罩", "疫苗", "复工", "网课", "小区", "新闻", "武汉", "社区", "医院"]
PUNCT = ["，", "！", "。", "？", "……"]

BURST = [
    "第一 家 方舱 医院 开始 收治 病人",
    "进入 方舱 的 病人 越来越 多",
    "听说 这个 方舱 里 很 温暖",
    "在 方舱 跳舞 的 阿姨 很 开心",
    "武汉 所有 方舱 都 休舱 了",
    "新建 方舱 让 人 安心",
    "方舱 医护 人员 辛苦 了",
]

DAYS = ["2020-02-01", "2020-02-02", "2020-02-03", "2020-02-04", "2020-02-05"]


def _text(words: str) -> str:
    return words.replace(" ", "")


def _comment(rng: random.Random) -> tuple[str, list[str], str, str]:
    pool = CLAUSES if rng.random() < 0.8 else SILENT
    clause, pol, emo = rng.choice(pool)
    words = clause.split()
    if rng.random() < 0.5:
        words = [rng.choice(TOPICS)] + words
    text = "".join(words) + rng.choice(PUNCT)
    return text, words, pol, emo


def comments(rng: random.Random) -> list[dict]:
    out = []
    n = 0
    for d, day in enumerate(DAYS):
        for i in range(20):
            n += 1
            text, _, _, _ = _comment(rng)
            if d == len(DAYS) - 1 and i % 2 == 0:
                text = _text(BURST[(i // 2) % len(BURST)]) + rng.choice(PUNCT)
            hour = rng.randrange(8, 24)  # +08:00 hours that stay on the same UTC date
            raw = text
            ctype = "plain"
            if n % 7 == 0:
                raw = f"<div class=\"wb\"><p>{text}</p><script>track({n})</script></div>"
                ctype = "html"
            out.append({
                "id": f"c{n:04d}",
                "source": "weibo-fixture",
                "fetched_at": f"{day}T{hour:02d}:{rng.randrange(60):02d}:00+08:00",
                "raw": raw,
                "content_type": ctype,
            })
    # re-crawled duplicates
    for rec in (out[3], out[17], out[42], out[77]):
        out.append(dict(rec))
    out.append({"id": "c0101", "source": "weibo-fixture", "fetched_at": "",
                "raw": "转发微博", "content_type": "plain"})
    return out


def nb_train(rng: random.Random) -> list[dict]:
    stops = {ln.strip() for ln in (DATA / "stopwords.txt").read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.startswith("#")}
    out = []
    for clause, pol, _ in CLAUSES + SILENT + SILENT:
        for _ in range(2):
            words = clause.split()
            if rng.random() < 0.5:
                words = [rng.choice(TOPICS)] + words
            out.append({"tokens": [w for w in words if w not in stops], "label": pol})
    return out


def truth(rng: random.Random) -> list[dict]:
    out = []
    for i in range(78):
        text, _, pol, emo = _comment(rng)
        out.append({"id": f"t{i + 1:03d}", "text": text, "polarity": pol, "dominant_emotion": emo})
    out.append({"id": "t079", "text": "转发微博", "polarity": "", "dominant_emotion": "UNJUDGEABLE"})
    out.append({"id": "t080", "text": "[图片]", "polarity": "", "dominant_emotion": "UNJUDGEABLE"})
    return out


def _write(name: str, rows: list[dict]) -> None:
    with open(DATA / name, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    rng = random.Random(SEED)
    _write("comments.jsonl", comments(rng))
    _write("nb_train.jsonl", nb_train(rng))
    _write("truth.jsonl", truth(rng))


if __name__ == "__main__":
    main()

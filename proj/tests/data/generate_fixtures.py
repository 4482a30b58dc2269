#!/usr/bin/env python3
"""Writes the shared-task-shaped CSV fixtures used by the tests.

shared_task_train.csv: 860 labeled reviews, 430 per dialect; per dialect
154 positive, 168 negative, 108 neutral.
shared_task_eval.csv: 216 unlabeled reviews, 108 per dialect.

Texts are assembled from short dialect phrases so that they exercise alif
variants, Arabic punctuation and quoting, but carry no real content.
"""
import csv
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

PHRASES = {
    ("darija", "positive"): ["الفندق زوين بزاف", "الخدمة مزيانة", "الفطور كان واعر",
                             "أنا فرحان بالإقامة", "يستاهل كل فلس"],
    ("darija", "negative"): ["الأتمنة طالعة بزاف", "السيرفيس خايب", "البيت موسخ",
                             "ما عجبنيش الحال", "الاستقبال ماشي مزيان"],
    ("darija", "neutral"): ["فطور ما بيهش", "يمكن يكون احسن", "عادي بلا زيادة",
                            "البلاصة لا باس", "إقامة متوسطة"],
    ("saudi", "positive"): ["غرف الفندق اطلالتها ساحرة", "كل شي حلو مره",
                            "نظافة الغرف ممتازة", "آمن ومريح", "الموظفين رائعين"],
    ("saudi", "negative"): ["غالي مره", "ملعب اطفال صغير", "فريق ترفيهه خايس",
                            "الإزعاج طول الليل", "ما أنصح فيه"],
    ("saudi", "neutral"): ["فندق لازمه اهتمام", "ممكن يكون جيد", "يحتاج تعديلات كثيرة",
                           "مقبول إلى حد ما", "السعر متوسط"],
}
PUNCT = ["", "!", "!!!", ".", "، ", "؟", "...", " (تجربة)", ",", " \"جدا\""]
COUNTS = {"positive": 154, "negative": 168, "neutral": 108}


def make_text(rng, dialect, label):
    parts = rng.sample(PHRASES[(dialect, label)], k=rng.randint(2, 3))
    return " ".join(p + rng.choice(PUNCT) for p in parts)


def main():
    rng = random.Random(20250601)
    rows = []
    for dialect in ("darija", "saudi"):
        pool = [lab for lab, n in COUNTS.items() for _ in range(n)]
        rng.shuffle(pool)
        # Keep first-occurrence order positive, negative, neutral.
        head = ["positive", "negative", "neutral"]
        for lab in head:
            pool.remove(lab)
        pool = head + pool
        for lab in pool:
            rows.append((dialect, lab))
    # Interleave the dialects so both appear early.
    darija = [r for r in rows if r[0] == "darija"]
    saudi = [r for r in rows if r[0] == "saudi"]
    ordered = [r for pair in zip(darija, saudi) for r in pair]

    with open(HERE / "shared_task_train.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ID", "Sentiment", "Text", "Dialect"])
        for i, (dialect, lab) in enumerate(ordered):
            shown = lab.capitalize() if i % 7 == 0 else lab
            w.writerow([f"train-{i:04d}", shown, make_text(rng, dialect, lab),
                        dialect.capitalize()])

    with open(HERE / "shared_task_eval.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ID", "Text", "Dialect"])
        for i in range(216):
            dialect = "darija" if i % 2 == 0 else "saudi"
            lab = rng.choice(list(COUNTS))
            w.writerow([f"eval-{i:04d}", make_text(rng, dialect, lab),
                        dialect.capitalize()])


if __name__ == "__main__":
    main()

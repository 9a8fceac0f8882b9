def last_item(items):
    return items[len(items)]

print(last_item([1, 2, 3]))

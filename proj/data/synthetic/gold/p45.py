def is_odd(number):
    if number / 2 != 0:
        return True
    return False

print(is_odd(7))
